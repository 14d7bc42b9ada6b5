#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "hcpinn/errors.hpp"

namespace hcpinn {

/// Scalar objective over a flat parameter vector. Implementations may expose
/// a per-term breakdown of the most recent evaluation for logging.
class Objective {
  public:
    virtual ~Objective() = default;
    virtual double value(const Eigen::VectorXd& theta) = 0;
    virtual double value_and_grad(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) = 0;
    virtual std::vector<std::string> term_names() const { return {}; }
    virtual std::vector<double> term_values() const { return {}; }
    /// Called after each optimizer iteration (spot checks, cadenced output).
    virtual void iteration_hook(long /*iter*/, const Eigen::VectorXd& /*theta*/) {}
};

struct AdamConfig {
    long iterations = 0;
    /// Piecewise-constant stages: (start iteration, learning rate); the
    /// first stage must start at 0 and stages must be ordered.
    std::vector<std::pair<long, double>> schedule{{0, 1e-3}};
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;  // echoed into the report

    void validate() const {
        HCPINN_REQUIRE(iterations >= 0, ConfigError, "adam: iterations must be >= 0");
        HCPINN_REQUIRE(!schedule.empty() && schedule.front().first == 0, ConfigError,
                       "adam: schedule must start at iteration 0");
        for (std::size_t i = 1; i < schedule.size(); ++i)
            HCPINN_REQUIRE(schedule[i].first > schedule[i - 1].first, ConfigError,
                           "adam: schedule stages must be strictly increasing");
        HCPINN_REQUIRE(beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1, ConfigError,
                       "adam: betas must lie in (0,1)");
    }

    double rate_at(long iter) const {
        double lr = schedule.front().second;
        for (const auto& [start, r] : schedule)
            if (iter >= start) lr = r;
        return lr;
    }

    /// Rescale stage boundaries proportionally to a new iteration budget
    /// (used by the --iterations override).
    AdamConfig rescaled(long new_iterations) const {
        AdamConfig out = *this;
        if (new_iterations == iterations || iterations == 0) {
            out.iterations = new_iterations;
            return out;
        }
        out.iterations = new_iterations;
        const double ratio = static_cast<double>(new_iterations) / static_cast<double>(iterations);
        for (auto& [start, r] : out.schedule) start = static_cast<long>(std::llround(start * ratio));
        for (std::size_t i = 1; i < out.schedule.size(); ++i)
            if (out.schedule[i].first <= out.schedule[i - 1].first)
                out.schedule[i].first = out.schedule[i - 1].first + 1;
        return out;
    }
};

struct LbfgsConfig {
    long iterations = 0;
    int history = 10;
    double step = 1.0;  // initial trial step
    double c1 = 1e-4;   // sufficient decrease
    double c2 = 0.9;    // curvature
    int max_line_iters = 30;
    double grad_tol = 1e-12;
    bool record_wolfe = false;

    void validate() const {
        HCPINN_REQUIRE(iterations >= 0 && history > 0, ConfigError, "lbfgs: bad iterations/history");
        HCPINN_REQUIRE(0 < c1 && c1 < c2 && c2 < 1, ConfigError, "lbfgs: need 0 < c1 < c2 < 1");
    }
};

/// One accepted line-search step, kept only when record_wolfe is on.
struct WolfeRecord {
    double alpha, phi0, dphi0, phi, dphi;
};

struct TrainReport {
    std::vector<double> loss_history;               // one entry per iteration run
    std::vector<std::string> term_names;
    std::vector<std::vector<double>> term_history;  // parallel to loss_history
    std::vector<WolfeRecord> wolfe_log;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    long iterations_run = 0;
    std::string status = "ok";  // ok | diverged | line_search_failed | converged
};

/// Full-batch ADAM with bias correction and a piecewise-constant learning
/// rate schedule. All parameter blocks in `theta` update simultaneously.
inline TrainReport adam_run(Objective& obj, Eigen::VectorXd& theta, const AdamConfig& cfg) {
    cfg.validate();
    TrainReport report;
    report.seed = cfg.seed;
    report.term_names = obj.term_names();
    const auto t_start = std::chrono::steady_clock::now();

    Eigen::VectorXd grad(theta.size()), m = Eigen::VectorXd::Zero(theta.size()),
                    v = Eigen::VectorXd::Zero(theta.size());
    double b1p = 1.0, b2p = 1.0;
    for (long it = 0; it < cfg.iterations; ++it) {
        const double loss = obj.value_and_grad(theta, grad);
        if (!std::isfinite(loss) || !grad.allFinite()) {
            report.status = "diverged";
            break;
        }
        report.loss_history.push_back(loss);
        if (!report.term_names.empty()) report.term_history.push_back(obj.term_values());
        report.iterations_run = it + 1;

        const double lr = cfg.rate_at(it);
        b1p *= cfg.beta1;
        b2p *= cfg.beta2;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
        const double mc = 1.0 / (1.0 - b1p), vc = 1.0 / (1.0 - b2p);
        theta.array() -= lr * (mc * m.array()) / ((vc * v.array()).sqrt() + cfg.eps);
        obj.iteration_hook(it, theta);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

namespace detail {

/// Cubic/bisection interpolation inside a bracket (Nocedal-Wright zoom).
inline double interpolate_step(double lo, double flo, double dlo, double hi, double fhi) {
    // Attempt a cubic through (lo, flo, dlo) and (hi, fhi); fall back to
    // bisection when the result is outside or too close to the ends.
    const double d = hi - lo;
    double cand = lo - 0.5 * dlo * d * d / (fhi - flo - dlo * d);
    const double a = std::min(lo, hi), b = std::max(lo, hi);
    const double margin = 0.1 * (b - a);
    if (!std::isfinite(cand) || cand < a + margin || cand > b - margin) cand = 0.5 * (lo + hi);
    return cand;
}

}  // namespace detail

/// L-BFGS with a strong Wolfe line search.
///
/// Every accepted step satisfies the sufficient-decrease condition with c1
/// and the strong curvature condition with c2. Curvature pairs with
/// non-positive s'y are discarded; an empty history falls back to the
/// steepest-descent direction.
inline TrainReport lbfgs_run(Objective& obj, Eigen::VectorXd& theta, const LbfgsConfig& cfg) {
    cfg.validate();
    TrainReport report;
    report.term_names = obj.term_names();
    const auto t_start = std::chrono::steady_clock::now();

    const Eigen::Index n = theta.size();
    Eigen::VectorXd grad(n);
    double f = obj.value_and_grad(theta, grad);
    if (!std::isfinite(f)) throw TrainingError("lbfgs: non-finite initial loss", 0);

    std::deque<Eigen::VectorXd> S, Y;
    std::deque<double> rho;

    for (long it = 0; it < cfg.iterations; ++it) {
        if (grad.norm() <= cfg.grad_tol) {
            report.status = "converged";
            break;
        }
        // Two-loop recursion.
        Eigen::VectorXd d = -grad;
        std::vector<double> alpha(S.size());
        for (std::size_t i = S.size(); i-- > 0;) {
            alpha[i] = rho[i] * S[i].dot(d);
            d -= alpha[i] * Y[i];
        }
        if (!S.empty()) d *= S.back().dot(Y.back()) / Y.back().squaredNorm();
        for (std::size_t i = 0; i < S.size(); ++i) {
            const double beta = rho[i] * Y[i].dot(d);
            d += (alpha[i] - beta) * S[i];
        }
        double dphi0 = grad.dot(d);
        if (dphi0 >= 0.0) {  // not a descent direction; restart
            d = -grad;
            dphi0 = grad.dot(d);
        }

        // Strong Wolfe line search (bracket then zoom).
        const double phi0 = f;
        Eigen::VectorXd trial_grad(n);
        Eigen::VectorXd x0 = theta;
        auto eval = [&](double a, double& phi, double& dphi) {
            theta = x0 + a * d;
            phi = obj.value_and_grad(theta, trial_grad);
            dphi = trial_grad.dot(d);
        };

        double a_prev = 0.0, phi_prev = phi0, dphi_prev = dphi0;
        double a = cfg.step;
        double a_max = 1e6;
        double phi_a = 0, dphi_a = 0;
        bool accepted = false, failed = false;
        double lo = 0, f_lo = phi0, d_lo = dphi0, hi = 0, f_hi = 0;
        bool bracketed = false;

        for (int ls = 0; ls < cfg.max_line_iters; ++ls) {
            eval(a, phi_a, dphi_a);
            if (!std::isfinite(phi_a) || phi_a > phi0 + cfg.c1 * a * dphi0 || (ls > 0 && phi_a >= phi_prev)) {
                lo = a_prev; f_lo = phi_prev; d_lo = dphi_prev;
                hi = a; f_hi = phi_a;
                bracketed = true;
                break;
            }
            if (std::abs(dphi_a) <= -cfg.c2 * dphi0) {
                accepted = true;
                break;
            }
            if (dphi_a >= 0.0) {
                lo = a; f_lo = phi_a; d_lo = dphi_a;
                hi = a_prev; f_hi = phi_prev;
                bracketed = true;
                break;
            }
            a_prev = a; phi_prev = phi_a; dphi_prev = dphi_a;
            a = std::min(2.0 * a, a_max);
        }
        if (bracketed && !accepted) {
            for (int z = 0; z < cfg.max_line_iters; ++z) {
                const double aj = detail::interpolate_step(lo, f_lo, d_lo, hi, f_hi);
                eval(aj, phi_a, dphi_a);
                if (!std::isfinite(phi_a) || phi_a > phi0 + cfg.c1 * aj * dphi0 || phi_a >= f_lo) {
                    hi = aj; f_hi = phi_a;
                } else {
                    if (std::abs(dphi_a) <= -cfg.c2 * dphi0) {
                        a = aj;
                        accepted = true;
                        break;
                    }
                    if (dphi_a * (hi - lo) >= 0.0) {
                        hi = lo; f_hi = f_lo;
                    }
                    lo = aj; f_lo = phi_a; d_lo = dphi_a;
                }
                if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
            }
        }
        if (!accepted) failed = true;

        if (failed) {
            theta = x0;  // leave parameters at the last accepted point
            f = obj.value_and_grad(theta, grad);
            report.status = "line_search_failed";
            break;
        }

        assert(phi_a <= phi0 + cfg.c1 * a * dphi0);
        assert(std::abs(dphi_a) <= -cfg.c2 * dphi0);
        if (cfg.record_wolfe) report.wolfe_log.push_back({a, phi0, dphi0, phi_a, dphi_a});

        const Eigen::VectorXd s = theta - x0;
        const Eigen::VectorXd y = trial_grad - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            S.push_back(s);
            Y.push_back(y);
            rho.push_back(1.0 / sy);
            if (static_cast<int>(S.size()) > cfg.history) {
                S.pop_front();
                Y.pop_front();
                rho.pop_front();
            }
        }
        f = phi_a;
        grad = trial_grad;
        report.loss_history.push_back(f);
        if (!report.term_names.empty()) report.term_history.push_back(obj.term_values());
        report.iterations_run = it + 1;
        obj.iteration_hook(it, theta);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

}  // namespace hcpinn
