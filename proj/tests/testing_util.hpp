#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "hcpinn/mlp.hpp"

namespace hcpinn::testing {

/// Central-difference gradient of a scalar function of a vector.
inline Eigen::VectorXd fd_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& x, double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = h * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + step;
        const double fp = f(xp);
        xp(i) = x(i) - step;
        const double fm = f(xp);
        xp(i) = x(i);
        g(i) = (fp - fm) / (2.0 * step);
    }
    return g;
}

/// Central-difference Hessian from function values only (independent of any
/// analytic gradient path).
inline Eigen::MatrixXd fd_hess(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& x, double h = 1e-4) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd xp = x;
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = h * std::max(1.0, std::abs(x(i)));
        xp(i) = x(i) + hi;
        const double fp = f(xp);
        xp(i) = x(i) - hi;
        const double fm = f(xp);
        xp(i) = x(i);
        H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double hj = h * std::max(1.0, std::abs(x(j)));
            xp(i) = x(i) + hi;
            xp(j) = x(j) + hj;
            const double fpp = f(xp);
            xp(j) = x(j) - hj;
            const double fpm = f(xp);
            xp(i) = x(i) - hi;
            const double fmm = f(xp);
            xp(j) = x(j) + hj;
            const double fmp = f(xp);
            xp(i) = x(i);
            xp(j) = x(j);
            H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
        }
    }
    return H;
}

/// Relative mismatch of two vectors against the larger scale of the pair.
inline double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double scale = std::max({1e-12, a.norm(), b.norm()});
    return (a - b).norm() / scale;
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max({1e-12, a.norm(), b.norm()});
    return (a - b).norm() / scale;
}

/// Random small network for oracle tests.
inline MlpParams random_net(const std::vector<int>& widths, std::uint64_t seed) {
    Rng rng(seed);
    return MlpParams::init(widths, rng);
}

}  // namespace hcpinn::testing
