#pragma once

#include <array>
#include <cmath>

#include "hcpinn/jet.hpp"

namespace hcpinn {

/// Forward second-order jet over at most 3 independent variables
/// (x1, x2 and optionally t). Closed-form fields -- manufactured
/// solutions, auxiliary functions, data terms -- are written as CJet
/// expressions so their gradients and Hessians come out of the chain
/// rule instead of hand-derived formulas.
class CJet {
  public:
    static constexpr int kMaxDim = 3;

    CJet() = default;

    static CJet constant(double v, int dim) {
        CJet j;
        j.dim_ = dim;
        j.val_ = v;
        return j;
    }

    static CJet variable(double v, int index, int dim) {
        CJet j = constant(v, dim);
        j.grad_[index] = 1.0;
        return j;
    }

    /// Assemble a jet from externally computed derivatives (the Hessian is
    /// symmetrized).
    static CJet from_parts(double v, const Eigen::VectorXd& grad, const Eigen::MatrixXd& hess) {
        CJet j = constant(v, static_cast<int>(grad.size()));
        for (int i = 0; i < j.dim_; ++i) {
            j.grad_[i] = grad(i);
            for (int k = 0; k < j.dim_; ++k) j.hess_[i][k] = 0.5 * (hess(i, k) + hess(k, i));
        }
        return j;
    }

    double value() const { return val_; }
    int dim() const { return dim_; }
    double grad(int i) const { return grad_[i]; }
    double hess(int i, int j) const { return hess_[i][j]; }
    double laplacian(int n_spatial) const {
        double s = 0.0;
        for (int i = 0; i < n_spatial; ++i) s += hess_[i][i];
        return s;
    }

    Jet2 to_jet2() const {
        Jet2 out(dim_);
        out.value = val_;
        for (int i = 0; i < dim_; ++i) {
            out.grad[i] = grad_[i];
            for (int j = 0; j < dim_; ++j) out.hess(i, j) = hess_[i][j];
        }
        return out;
    }

    friend CJet operator+(const CJet& a, const CJet& b) {
        CJet r = a;
        r.val_ += b.val_;
        for (int i = 0; i < r.dim_; ++i) {
            r.grad_[i] += b.grad_[i];
            for (int j = 0; j < r.dim_; ++j) r.hess_[i][j] += b.hess_[i][j];
        }
        return r;
    }
    friend CJet operator-(const CJet& a, const CJet& b) { return a + (-b); }
    friend CJet operator-(const CJet& a) {
        CJet r = a;
        r.val_ = -r.val_;
        for (int i = 0; i < r.dim_; ++i) {
            r.grad_[i] = -r.grad_[i];
            for (int j = 0; j < r.dim_; ++j) r.hess_[i][j] = -r.hess_[i][j];
        }
        return r;
    }
    friend CJet operator*(const CJet& a, const CJet& b) {
        CJet r = CJet::constant(a.val_ * b.val_, a.dim_);
        for (int i = 0; i < r.dim_; ++i)
            r.grad_[i] = a.grad_[i] * b.val_ + a.val_ * b.grad_[i];
        for (int i = 0; i < r.dim_; ++i)
            for (int j = 0; j < r.dim_; ++j)
                r.hess_[i][j] = a.hess_[i][j] * b.val_ + a.grad_[i] * b.grad_[j] +
                                a.grad_[j] * b.grad_[i] + a.val_ * b.hess_[i][j];
        return r;
    }
    friend CJet operator+(const CJet& a, double c) { return a + constant(c, a.dim_); }
    friend CJet operator+(double c, const CJet& a) { return a + c; }
    friend CJet operator-(const CJet& a, double c) { return a + (-c); }
    friend CJet operator-(double c, const CJet& a) { return (-a) + c; }
    friend CJet operator*(const CJet& a, double c) {
        CJet r = a;
        r.val_ *= c;
        for (int i = 0; i < r.dim_; ++i) {
            r.grad_[i] *= c;
            for (int j = 0; j < r.dim_; ++j) r.hess_[i][j] *= c;
        }
        return r;
    }
    friend CJet operator*(double c, const CJet& a) { return a * c; }
    friend CJet operator/(const CJet& a, double c) { return a * (1.0 / c); }
    friend CJet operator/(const CJet& a, const CJet& b) { return a * unary(b, 1.0 / b.val_, -1.0 / (b.val_ * b.val_), 2.0 / (b.val_ * b.val_ * b.val_)); }

    /// Chain rule for f(u) given f(u0), f'(u0), f''(u0).
    static CJet unary(const CJet& u, double f, double df, double ddf) {
        CJet r = CJet::constant(f, u.dim_);
        for (int i = 0; i < r.dim_; ++i) r.grad_[i] = df * u.grad_[i];
        for (int i = 0; i < r.dim_; ++i)
            for (int j = 0; j < r.dim_; ++j)
                r.hess_[i][j] = df * u.hess_[i][j] + ddf * u.grad_[i] * u.grad_[j];
        return r;
    }

  private:
    int dim_ = 2;
    double val_ = 0.0;
    std::array<double, kMaxDim> grad_{{0, 0, 0}};
    std::array<std::array<double, kMaxDim>, kMaxDim> hess_{{{{0, 0, 0}}, {{0, 0, 0}}, {{0, 0, 0}}}};
};

inline CJet sin(const CJet& u) {
    double s = std::sin(u.value()), c = std::cos(u.value());
    return CJet::unary(u, s, c, -s);
}
inline CJet cos(const CJet& u) {
    double s = std::sin(u.value()), c = std::cos(u.value());
    return CJet::unary(u, c, -s, -c);
}
inline CJet sqrt(const CJet& u) {
    double s = std::sqrt(u.value());
    return CJet::unary(u, s, 0.5 / s, -0.25 / (s * s * s));
}
/// u^p for real exponent; u must stay positive where derivatives are taken.
inline CJet pow(const CJet& u, double p) {
    double v = std::pow(u.value(), p);
    return CJet::unary(u, v, p * std::pow(u.value(), p - 1.0), p * (p - 1.0) * std::pow(u.value(), p - 2.0));
}
inline CJet cube(const CJet& u) { return u * u * u; }

}  // namespace hcpinn
