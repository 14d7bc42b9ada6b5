#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "hcpinn/errors.hpp"
#include "hcpinn/jet.hpp"
#include "hcpinn/rng.hpp"
#include "json.hpp"

namespace hcpinn {

// ---------------------------------------------------------------------------
// Parameters of a fully connected scalar network: tanh on hidden layers,
// identity on the output layer. Weights live in one flat vector so the
// optimizers can treat a network as a plain point in R^n; layer views are
// Eigen maps into that vector.
// ---------------------------------------------------------------------------

struct LayerShape {
    int in = 0;
    int out = 0;
};

class MlpParams {
  public:
    MlpParams() = default;

    /// `widths` = {in, hidden..., out}; the output width must be 1.
    static MlpParams zeros(const std::vector<int>& widths) {
        MlpParams p;
        HCPINN_REQUIRE(widths.size() >= 2, ShapeError, "network needs at least one layer");
        HCPINN_REQUIRE(widths.back() == 1, ShapeError, "output dimension must be 1");
        for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
            HCPINN_REQUIRE(widths[k] > 0 && widths[k + 1] > 0, ShapeError, "layer widths must be positive");
            p.shapes_.push_back({widths[k], widths[k + 1]});
        }
        p.offsets_.resize(p.shapes_.size());
        Eigen::Index total = 0;
        for (std::size_t k = 0; k < p.shapes_.size(); ++k) {
            p.offsets_[k] = total;
            total += static_cast<Eigen::Index>(p.shapes_[k].in) * p.shapes_[k].out + p.shapes_[k].out;
        }
        p.theta_ = Eigen::VectorXd::Zero(total);
        return p;
    }

    /// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for
    /// both weights and biases. Weights are drawn in column-major storage
    /// order, then the biases.
    static MlpParams init(const std::vector<int>& widths, Rng& rng) {
        MlpParams p = zeros(widths);
        for (std::size_t k = 0; k < p.shapes_.size(); ++k) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(p.shapes_[k].in));
            auto w = p.weight(k);
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-bound, bound);
            auto b = p.bias(k);
            for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-bound, bound);
        }
        return p;
    }

    int n_layers() const { return static_cast<int>(shapes_.size()); }
    int input_dim() const { return shapes_.front().in; }
    const LayerShape& shape(std::size_t k) const { return shapes_[k]; }

    Eigen::Map<const Eigen::MatrixXd> weight(std::size_t k) const {
        return {theta_.data() + offsets_[k], shapes_[k].out, shapes_[k].in};
    }
    Eigen::Map<Eigen::MatrixXd> weight(std::size_t k) {
        return {theta_.data() + offsets_[k], shapes_[k].out, shapes_[k].in};
    }
    Eigen::Map<const Eigen::VectorXd> bias(std::size_t k) const {
        return {theta_.data() + offsets_[k] + static_cast<Eigen::Index>(shapes_[k].in) * shapes_[k].out,
                shapes_[k].out};
    }
    Eigen::Map<Eigen::VectorXd> bias(std::size_t k) {
        return {theta_.data() + offsets_[k] + static_cast<Eigen::Index>(shapes_[k].in) * shapes_[k].out,
                shapes_[k].out};
    }

    const Eigen::VectorXd& flat() const { return theta_; }
    Eigen::VectorXd& flat() { return theta_; }
    Eigen::Index size() const { return theta_.size(); }

    bool all_finite() const { return theta_.allFinite(); }

    /// Zero-valued gradient holder with the exact parameter layout.
    Eigen::VectorXd zero_grad() const { return Eigen::VectorXd::Zero(theta_.size()); }

    void save(const std::string& path) const {
        nlohmann::json j;
        j["format"] = "hcpinn-mlp";
        j["version"] = 1;
        j["activation"] = "tanh";
        auto& layers = j["layers"];
        for (std::size_t k = 0; k < shapes_.size(); ++k) {
            nlohmann::json lj;
            lj["in"] = shapes_[k].in;
            lj["out"] = shapes_[k].out;
            auto w = weight(k);
            std::vector<double> wr;
            wr.reserve(static_cast<std::size_t>(w.size()));
            for (Eigen::Index i = 0; i < w.rows(); ++i)
                for (Eigen::Index jj = 0; jj < w.cols(); ++jj) wr.push_back(w(i, jj));
            lj["weight"] = wr;
            auto b = bias(k);
            lj["bias"] = std::vector<double>(b.data(), b.data() + b.size());
            layers.push_back(std::move(lj));
        }
        std::ofstream out(path);
        HCPINN_REQUIRE(out.good(), ConfigError, "cannot open checkpoint for writing: " + path);
        out << j.dump(2) << "\n";
    }

    static MlpParams load(const std::string& path) {
        std::ifstream in(path);
        HCPINN_REQUIRE(in.good(), ConfigError, "cannot open checkpoint: " + path);
        nlohmann::json j;
        in >> j;
        HCPINN_REQUIRE(j.value("format", "") == "hcpinn-mlp", ConfigError, "not an hcpinn-mlp checkpoint: " + path);
        HCPINN_REQUIRE(j.value("version", 0) == 1, ConfigError, "unsupported checkpoint version in " + path);
        std::vector<int> widths;
        for (const auto& lj : j.at("layers")) {
            if (widths.empty()) widths.push_back(lj.at("in").get<int>());
            widths.push_back(lj.at("out").get<int>());
        }
        MlpParams p = zeros(widths);
        std::size_t k = 0;
        for (const auto& lj : j.at("layers")) {
            auto w = p.weight(k);
            const auto wr = lj.at("weight").get<std::vector<double>>();
            HCPINN_REQUIRE(static_cast<Eigen::Index>(wr.size()) == w.size(), ShapeError,
                           "weight size mismatch in " + path);
            std::size_t idx = 0;
            for (Eigen::Index i = 0; i < w.rows(); ++i)
                for (Eigen::Index jj = 0; jj < w.cols(); ++jj) w(i, jj) = wr[idx++];
            auto b = p.bias(k);
            const auto br = lj.at("bias").get<std::vector<double>>();
            HCPINN_REQUIRE(static_cast<Eigen::Index>(br.size()) == b.size(), ShapeError,
                           "bias size mismatch in " + path);
            for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = br[i];
            ++k;
        }
        HCPINN_REQUIRE(p.all_finite(), ShapeError, "non-finite parameters in " + path);
        return p;
    }

  private:
    std::vector<LayerShape> shapes_;
    std::vector<Eigen::Index> offsets_;
    Eigen::VectorXd theta_;
};

// ---------------------------------------------------------------------------
// Plain evaluation and full second-order jets.
//
// Differentiation mechanism: analytic layer-by-layer propagation of
// (value, gradient, Hessian) triples in forward mode, with a matching
// reverse sweep for parameter gradients (see JetTape). Losses containing
// input Hessians therefore get exact third-order mixed derivatives without
// any nested tapes. tanh derivatives are computed as u = 1 - t^2 and
// -2*t*u with t = tanh(s).
// ---------------------------------------------------------------------------

inline double mlp_eval(const MlpParams& net, const Eigen::VectorXd& x) {
    HCPINN_REQUIRE(x.size() == net.input_dim(), ShapeError, "mlp_eval: input dimension mismatch");
    Eigen::VectorXd a = x;
    for (int k = 0; k < net.n_layers(); ++k) {
        Eigen::VectorXd s = net.weight(k) * a + net.bias(k);
        if (k + 1 < net.n_layers())
            for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::tanh(s(i));
        a = std::move(s);
    }
    return a(0);
}

namespace detail {

/// Packed symmetric index pairs: (0,0),(0,1),...,(0,m-1),(1,1),...,(m-1,m-1).
inline std::vector<std::pair<int, int>> sym_pairs(int m) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(m) * (m + 1) / 2);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) pairs.emplace_back(i, j);
    return pairs;
}

inline int sym_index(int i, int j, int m) {
    if (i > j) std::swap(i, j);
    return i * m - i * (i - 1) / 2 + (j - i);
}

/// Per-layer jet state for one point: rows = neurons, channel columns =
/// [value | grad(m) | packed hess(m(m+1)/2)].
struct LayerJets {
    Eigen::VectorXd val;
    Eigen::MatrixXd grad;
    Eigen::MatrixXd hess;
};

}  // namespace detail

/// Full-jet forward pass with recorded activations, plus the reverse sweep
/// that turns output-jet adjoints into parameter gradients. This is the
/// engine behind every loss gradient in the project (the batched lane
/// variant in lanes.hpp specializes it for training throughput).
class JetTape {
  public:
    JetTape(const MlpParams& net) : net_(&net), m_(net.input_dim()), pairs_(detail::sym_pairs(m_)) {}

    /// Forward pass; seeds are the canonical ones (grad = I, hess = 0).
    const Jet2& forward(const Eigen::VectorXd& x) {
        HCPINN_REQUIRE(x.size() == m_, ShapeError, "mlp_jet: input dimension mismatch");
        const int L = net_->n_layers();
        const int npack = static_cast<int>(pairs_.size());
        pre_.resize(L);
        post_.resize(L + 1);
        post_[0].val = x;
        post_[0].grad = Eigen::MatrixXd::Identity(m_, m_);
        post_[0].hess = Eigen::MatrixXd::Zero(m_, npack);
        for (int k = 0; k < L; ++k) {
            const auto W = net_->weight(k);
            pre_[k].val = W * post_[k].val + net_->bias(k);
            pre_[k].grad.noalias() = W * post_[k].grad;
            pre_[k].hess.noalias() = W * post_[k].hess;
            if (k + 1 < L) {
                const Eigen::Index n = pre_[k].val.size();
                auto& a = post_[k + 1];
                a.val.resize(n);
                a.grad.resize(n, m_);
                a.hess.resize(n, npack);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double t = std::tanh(pre_[k].val(i));
                    const double u = 1.0 - t * t;
                    const double v = -2.0 * t * u;
                    a.val(i) = t;
                    a.grad.row(i) = u * pre_[k].grad.row(i);
                    for (int c = 0; c < npack; ++c) {
                        const auto [p, q] = pairs_[c];
                        a.hess(i, c) = u * pre_[k].hess(i, c) + v * pre_[k].grad(i, p) * pre_[k].grad(i, q);
                    }
                }
            } else {
                post_[k + 1] = pre_[k];
            }
        }
        out_ = Jet2(m_);
        out_.value = post_[L].val(0);
        out_.grad = post_[L].grad.row(0).transpose();
        for (int c = 0; c < npack; ++c) {
            const auto [p, q] = pairs_[c];
            out_.hess(p, q) = post_[L].hess(0, c);
            out_.hess(q, p) = post_[L].hess(0, c);
        }
        return out_;
    }

    const Jet2& output() const { return out_; }

    /// Reverse sweep for the most recent forward pass. `vbar`, `gbar` and
    /// `hbar` are the loss partials with respect to the output value,
    /// gradient entries and full symmetric Hessian; the result accumulates
    /// into `grad_accum` (flat parameter layout).
    void reverse(double vbar, const Eigen::VectorXd& gbar, const Eigen::MatrixXd& hbar,
                 Eigen::VectorXd& grad_accum) const {
        const int L = net_->n_layers();
        const int npack = static_cast<int>(pairs_.size());
        detail::LayerJets bar;
        bar.val = Eigen::VectorXd::Constant(1, vbar);
        bar.grad = gbar.transpose();
        bar.hess.resize(1, npack);
        for (int c = 0; c < npack; ++c) {
            const auto [p, q] = pairs_[c];
            // Packed channel (p,q) carries both (p,q) and (q,p) of the full
            // Hessian, so off-diagonal adjoints add up.
            bar.hess(0, c) = (p == q) ? hbar(p, p) : hbar(p, q) + hbar(q, p);
        }
        for (int k = L - 1; k >= 0; --k) {
            if (k + 1 < L) {
                // tanh reverse, using the recorded pre-activation jets.
                const Eigen::Index n = pre_[k].val.size();
                detail::LayerJets sbar;
                sbar.val.resize(n);
                sbar.grad.resize(n, m_);
                sbar.hess.resize(n, npack);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double t = std::tanh(pre_[k].val(i));
                    const double u = 1.0 - t * t;
                    const double v = -2.0 * t * u;
                    const double w3 = u * (6.0 * t * t - 2.0);
                    double sv = u * bar.val(i);
                    sv += v * bar.grad.row(i).dot(pre_[k].grad.row(i));
                    sbar.grad.row(i) = u * bar.grad.row(i);
                    for (int c = 0; c < npack; ++c) {
                        const auto [p, q] = pairs_[c];
                        const double hb = bar.hess(i, c);
                        sv += hb * (v * pre_[k].hess(i, c) + w3 * pre_[k].grad(i, p) * pre_[k].grad(i, q));
                        sbar.grad(i, p) += v * hb * pre_[k].grad(i, q);
                        sbar.grad(i, q) += v * hb * pre_[k].grad(i, p);
                        sbar.hess(i, c) = u * hb;
                    }
                    sbar.val(i) = sv;
                }
                bar = std::move(sbar);
            }
            // Linear reverse: accumulate parameter adjoints, push to inputs.
            const auto& a = post_[k];
            auto wbar = weight_view(grad_accum, k);
            wbar.noalias() += bar.val * a.val.transpose();
            wbar.noalias() += bar.grad * a.grad.transpose();
            wbar.noalias() += bar.hess * a.hess.transpose();
            bias_view(grad_accum, k) += bar.val;
            if (k > 0) {
                const auto W = net_->weight(k);
                detail::LayerJets abar;
                abar.val.noalias() = W.transpose() * bar.val;
                abar.grad.noalias() = W.transpose() * bar.grad;
                abar.hess.noalias() = W.transpose() * bar.hess;
                bar = std::move(abar);
            }
        }
    }

  private:
    Eigen::Map<Eigen::MatrixXd> weight_view(Eigen::VectorXd& g, std::size_t k) const {
        Eigen::Index off = offset(k);
        return {g.data() + off, net_->shape(k).out, net_->shape(k).in};
    }
    Eigen::Map<Eigen::VectorXd> bias_view(Eigen::VectorXd& g, std::size_t k) const {
        Eigen::Index off = offset(k) + static_cast<Eigen::Index>(net_->shape(k).in) * net_->shape(k).out;
        return {g.data() + off, net_->shape(k).out};
    }
    Eigen::Index offset(std::size_t k) const {
        Eigen::Index off = 0;
        for (std::size_t i = 0; i < k; ++i)
            off += static_cast<Eigen::Index>(net_->shape(i).in) * net_->shape(i).out + net_->shape(i).out;
        return off;
    }

    const MlpParams* net_;
    int m_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<detail::LayerJets> pre_;
    std::vector<detail::LayerJets> post_;
    Jet2 out_;
};

/// Value, input gradient and input Hessian of the network at x.
/// The value entry is computed by the identical arithmetic sequence as
/// mlp_eval, so the two agree bit for bit.
inline Jet2 mlp_jet(const MlpParams& net, const Eigen::VectorXd& x) {
    JetTape tape(net);
    Jet2 out = tape.forward(x);
    HCPINN_REQUIRE(out.all_finite(), ShapeError, "mlp_jet: non-finite result");
    return out;
}

}  // namespace hcpinn
