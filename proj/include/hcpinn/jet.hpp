#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "hcpinn/errors.hpp"

namespace hcpinn {

/// Second-order jet of a scalar field at a point: value, gradient and
/// Hessian with respect to the field's inputs. The Hessian is symmetric
/// by construction.
struct Jet2 {
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;

    Jet2() = default;
    explicit Jet2(int dim) : grad(Eigen::VectorXd::Zero(dim)), hess(Eigen::MatrixXd::Zero(dim, dim)) {}

    int dim() const { return static_cast<int>(grad.size()); }

    double laplacian() const { return hess.trace(); }

    bool all_finite() const {
        return std::isfinite(value) && grad.allFinite() && hess.allFinite();
    }
};

}  // namespace hcpinn
