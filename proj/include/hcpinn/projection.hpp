#pragma once

#include <cmath>
#include <limits>

#include "hcpinn/errors.hpp"

namespace hcpinn {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

namespace detail {
inline double relu(double v) { return v > 0.0 ? v : 0.0; }
}  // namespace detail

/// Box projection realized as the two-layer ReLU composition
///   L2(v) = -ReLU(ub - v) + ub,  L1(w) = ReLU(w - ua) + ua,
/// which equals clamp(v, ua, ub). Infinite bounds drop the matching layer.
inline double project_box(double v, double ua, double ub) {
    HCPINN_REQUIRE(ua <= ub, PreconditionError, "project_box: needs ua <= ub");
    double w = v;
    if (ub != kUnbounded) w = -detail::relu(ub - v) + ub;
    if (ua != -kUnbounded) w = detail::relu(w - ua) + ua;
    return w;
}

/// Subgradient of project_box with the inactive-at-kink convention:
/// ReLU' is taken as 0 at the origin, so the derivative is 0 whenever a
/// bound is active or touched.
inline double project_box_derivative(double v, double ua, double ub) {
    HCPINN_REQUIRE(ua <= ub, PreconditionError, "project_box: needs ua <= ub");
    double d = 1.0;
    if (ub != kUnbounded && !(ub - v > 0.0)) d = 0.0;
    if (ua != -kUnbounded) {
        const double w = ub != kUnbounded ? -detail::relu(ub - v) + ub : v;
        if (!(w - ua > 0.0)) d = 0.0;
    }
    return d;
}

}  // namespace hcpinn
