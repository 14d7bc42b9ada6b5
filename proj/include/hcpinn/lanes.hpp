#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hcpinn/errors.hpp"
#include "hcpinn/mlp.hpp"

namespace hcpinn {

// ---------------------------------------------------------------------------
// Batched Taylor-lane propagation.
//
// The full-Hessian jets in mlp.hpp cost O(m^2) channels per neuron. The
// residual losses only ever need the value, a few first-order directional
// derivatives, and second-order derivatives along the d coordinate curves
// x_a -> (x, phi(x)); those are exactly d directional second-order lanes.
// Each point therefore carries channels
//
//   [ value | f_1..f_F | (f,h)_1..(f,h)_S ]
//
// where f is a directional first derivative and (f,h) a paired directional
// first/second derivative. Channels propagate through linear layers as one
// matrix product over all points of a batch, which is where the training
// time goes.
// ---------------------------------------------------------------------------

struct LaneSpec {
    int n_first = 0;
    int n_second = 0;
    int comps() const { return 1 + n_first + 2 * n_second; }
    int first_col(int lane) const { return 1 + lane; }
    int pair_first_col(int lane) const { return 1 + n_first + 2 * lane; }
    int pair_second_col(int lane) const { return 1 + n_first + 2 * lane + 1; }
};

class LaneRun {
  public:
    LaneRun(const MlpParams& net, LaneSpec spec, int capacity)
        : net_(&net), spec_(spec), capacity_(capacity) {
        const int L = net.n_layers();
        const int cap_cols = capacity * spec_.comps();
        input_.setZero(net.input_dim(), cap_cols);
        pre_.resize(L);
        post_.resize(L);
        for (int k = 0; k < L; ++k) {
            pre_[k].setZero(net.shape(k).out, cap_cols);
            post_[k].setZero(net.shape(k).out, cap_cols);
        }
        seeds_.setZero(1, cap_cols);
    }

    const LaneSpec& spec() const { return spec_; }
    int capacity() const { return capacity_; }
    int active() const { return active_; }

    /// Caller fills columns for `npts` points before forward().
    Eigen::MatrixXd& input() { return input_; }

    void set_active(int npts) {
        HCPINN_REQUIRE(npts >= 0 && npts <= capacity_, ShapeError, "lane batch over capacity");
        active_ = npts;
    }

    void forward() {
        const int L = net_->n_layers();
        const int C = spec_.comps();
        const Eigen::Index cols = static_cast<Eigen::Index>(active_) * C;
        const Eigen::MatrixXd* a = &input_;
        for (int k = 0; k < L; ++k) {
            pre_[k].leftCols(cols).noalias() = net_->weight(k) * a->leftCols(cols);
            const auto b = net_->bias(k);
            for (int p = 0; p < active_; ++p) pre_[k].col(static_cast<Eigen::Index>(p) * C) += b;
            if (k + 1 < L)
                tanh_forward(pre_[k], post_[k], net_->shape(k).out, cols);
            else
                post_[k].leftCols(cols) = pre_[k].leftCols(cols);
            a = &post_[k];
        }
    }

    double value(int p) const { return out()(0, static_cast<Eigen::Index>(p) * spec_.comps()); }
    double first(int p, int lane) const {
        return out()(0, static_cast<Eigen::Index>(p) * spec_.comps() + spec_.first_col(lane));
    }
    double pair_first(int p, int lane) const {
        return out()(0, static_cast<Eigen::Index>(p) * spec_.comps() + spec_.pair_first_col(lane));
    }
    double pair_second(int p, int lane) const {
        return out()(0, static_cast<Eigen::Index>(p) * spec_.comps() + spec_.pair_second_col(lane));
    }

    /// Adjoint seeds for the output channels; zero it, fill, then reverse().
    Eigen::MatrixXd& seeds() { return seeds_; }

    /// Accumulates parameter adjoints of the seeded functional into
    /// `grad_accum` (flat layout congruent with the network).
    void reverse(Eigen::VectorXd& grad_accum) {
        const int L = net_->n_layers();
        const int C = spec_.comps();
        const Eigen::Index cols = static_cast<Eigen::Index>(active_) * C;
        bar_ = seeds_.leftCols(cols);
        for (int k = L - 1; k >= 0; --k) {
            if (k + 1 < L) tanh_reverse(pre_[k], post_[k], bar_, net_->shape(k).out, cols);
            const Eigen::MatrixXd& a_prev = (k == 0) ? input_ : post_[k - 1];
            auto wbar = weight_view(grad_accum, k);
            wbar.noalias() += bar_ * a_prev.leftCols(cols).transpose();
            auto bbar = bias_view(grad_accum, k);
            for (int p = 0; p < active_; ++p) bbar += bar_.col(static_cast<Eigen::Index>(p) * C);
            if (k > 0) {
                tmp_.noalias() = net_->weight(k).transpose() * bar_;
                bar_.swap(tmp_);
            }
        }
    }

  private:
    const Eigen::MatrixXd& out() const { return post_.back(); }

    // Column-contiguous passes: the value column is transformed first, then
    // each lane column reads u and v back off the stored tanh values.
    void tanh_forward(const Eigen::MatrixXd& s, Eigen::MatrixXd& a, int n, Eigen::Index cols) {
        const int C = spec_.comps();
        for (Eigen::Index pc = 0; pc < cols; pc += C) {
            for (int i = 0; i < n; ++i) a(i, pc) = std::tanh(s(i, pc));
            for (int l = 0; l < spec_.n_first; ++l) {
                const Eigen::Index c = pc + spec_.first_col(l);
                for (int i = 0; i < n; ++i) {
                    const double t = a(i, pc);
                    a(i, c) = (1.0 - t * t) * s(i, c);
                }
            }
            for (int l = 0; l < spec_.n_second; ++l) {
                const Eigen::Index cf = pc + spec_.pair_first_col(l);
                for (int i = 0; i < n; ++i) {
                    const double t = a(i, pc);
                    const double u = 1.0 - t * t;
                    const double f = s(i, cf);
                    a(i, cf) = u * f;
                    a(i, cf + 1) = u * s(i, cf + 1) - 2.0 * t * u * f * f;
                }
            }
        }
    }

    /// In place: converts post-activation adjoints in `bar` to
    /// pre-activation adjoints, using the recorded pre/post jets.
    void tanh_reverse(const Eigen::MatrixXd& s, const Eigen::MatrixXd& a, Eigen::MatrixXd& bar, int n,
                      Eigen::Index cols) {
        const int C = spec_.comps();
        for (Eigen::Index pc = 0; pc < cols; pc += C) {
            for (int i = 0; i < n; ++i) bar(i, pc) *= 1.0 - a(i, pc) * a(i, pc);
            for (int l = 0; l < spec_.n_first; ++l) {
                const Eigen::Index c = pc + spec_.first_col(l);
                for (int i = 0; i < n; ++i) {
                    const double t = a(i, pc);
                    const double u = 1.0 - t * t;
                    const double v = -2.0 * t * u;
                    bar(i, pc) += v * s(i, c) * bar(i, c);
                    bar(i, c) *= u;
                }
            }
            for (int l = 0; l < spec_.n_second; ++l) {
                const Eigen::Index cf = pc + spec_.pair_first_col(l);
                for (int i = 0; i < n; ++i) {
                    const double t = a(i, pc);
                    const double u = 1.0 - t * t;
                    const double v = -2.0 * t * u;
                    const double w3 = u * (6.0 * t * t - 2.0);
                    const double f = s(i, cf);
                    const double fbar = bar(i, cf);
                    const double hbar = bar(i, cf + 1);
                    bar(i, pc) += v * f * fbar + (v * s(i, cf + 1) + w3 * f * f) * hbar;
                    bar(i, cf) = u * fbar + 2.0 * v * f * hbar;
                    bar(i, cf + 1) = u * hbar;
                }
            }
        }
    }

    Eigen::Map<Eigen::MatrixXd> weight_view(Eigen::VectorXd& g, std::size_t k) const {
        return {g.data() + offset(k), net_->shape(k).out, net_->shape(k).in};
    }
    Eigen::Map<Eigen::VectorXd> bias_view(Eigen::VectorXd& g, std::size_t k) const {
        return {g.data() + offset(k) + static_cast<Eigen::Index>(net_->shape(k).in) * net_->shape(k).out,
                net_->shape(k).out};
    }
    Eigen::Index offset(std::size_t k) const {
        Eigen::Index off = 0;
        for (std::size_t i = 0; i < k; ++i)
            off += static_cast<Eigen::Index>(net_->shape(i).in) * net_->shape(i).out + net_->shape(i).out;
        return off;
    }

    const MlpParams* net_;
    LaneSpec spec_;
    int capacity_ = 0;
    int active_ = 0;
    Eigen::MatrixXd input_;
    std::vector<Eigen::MatrixXd> pre_;
    std::vector<Eigen::MatrixXd> post_;
    Eigen::MatrixXd seeds_;
    Eigen::MatrixXd bar_, tmp_;
};

}  // namespace hcpinn
