#pragma once

#include <memory>

#include "hcpinn/auxfields.hpp"
#include "hcpinn/geometry.hpp"
#include "hcpinn/mlp.hpp"

namespace hcpinn {

// ---------------------------------------------------------------------------
// DCSNN: a plain network over (x, z) where z in {+1,-1} selects the
// subdomain extension.
// ---------------------------------------------------------------------------

struct DcsnnField {
    MlpParams params;  // input (x1, x2, z) or (x1, x2, t, z)

    static double z_of(Region side) { return side == Region::Minus ? -1.0 : 1.0; }
};

inline double dcsnn_value(const DcsnnField& f, const Vec2& x, double z) {
    return mlp_eval(f.params, Eigen::Vector3d(x[0], x[1], z));
}

/// Jet over the full (x, z) input.
inline Jet2 dcsnn_jet(const DcsnnField& f, const Vec2& x, double z) {
    return mlp_jet(f.params, Eigen::Vector3d(x[0], x[1], z));
}

// ---------------------------------------------------------------------------
// Hard-constraint composites:
//   state   elliptic   y(x) = g(x) + h(x) N(x, phi(x))
//   adjoint elliptic   p(x) =        h(x) N(x, phi(x))
//   state   parabolic  y(x,t) = g(x,t) + t h(x) N(x, t, phi(x))
//   adjoint parabolic  p(x,t) = (T - t) h(x) N(x, t, phi(x))
// The boundary condition, the interface value jump, the initial condition
// and the adjoint terminal condition hold by construction; only the
// beta-weighted normal-derivative jump remains a soft target.
// ---------------------------------------------------------------------------

enum class FieldKind { StateElliptic, AdjointElliptic, StateParabolic, AdjointParabolic };

struct HardConstraintField {
    FieldKind kind = FieldKind::StateElliptic;
    std::shared_ptr<const AuxiliaryField> aux;
    std::shared_ptr<const InterfaceGeometry> geom;
    MlpParams core;  // N(x, phi) for elliptic, N(x, t, phi) for parabolic
    double T = 0.0;

    bool parabolic() const {
        return kind == FieldKind::StateParabolic || kind == FieldKind::AdjointParabolic;
    }
    bool has_lift() const {
        return kind == FieldKind::StateElliptic || kind == FieldKind::StateParabolic;
    }
    /// Multiplier of h(x) N(...) and its time derivative.
    void time_factor(double t, double& fac, double& dfac) const {
        switch (kind) {
            case FieldKind::StateParabolic: fac = t; dfac = 1.0; break;
            case FieldKind::AdjointParabolic: fac = T - t; dfac = -1.0; break;
            default: fac = 1.0; dfac = 0.0; break;
        }
    }
};

/// Value, spatial gradient/Hessian, and (for parabolic kinds) the time
/// derivative of a composite field, one-sided by the caller's region label.
struct HcJet {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    double dt = 0.0;

    double laplacian() const { return hess(0, 0) + hess(1, 1); }
};

namespace detail {

inline Eigen::VectorXd composite_input(const HardConstraintField& f, const Vec2& x, double t,
                                       double phi) {
    if (f.parabolic()) {
        Eigen::VectorXd xi(4);
        xi << x[0], x[1], t, phi;
        return xi;
    }
    Eigen::VectorXd xi(3);
    xi << x[0], x[1], phi;
    return xi;
}

}  // namespace detail

inline double hc_value(const HardConstraintField& f, const Vec2& x, Region side, double t = 0.0) {
    const double phi = f.aux->phi.value(x, side);
    const double n = mlp_eval(f.core, detail::composite_input(f, x, t, phi));
    const double h = f.aux->h.value(x, side);
    double fac, dfac;
    f.time_factor(t, fac, dfac);
    double v = fac * h * n;
    if (f.has_lift())
        v += f.parabolic() ? f.aux->g_time->value(x, t, side) : f.aux->g.value(x, side);
    return v;
}

/// One-sided composite jet; the region label picks the g/phi branches and is
/// never re-derived from the coordinates. Points on Gamma are rejected --
/// interface quantities come from hc_interface_jump.
inline HcJet hc_jet(const HardConstraintField& f, const Vec2& x, Region side, double t = 0.0) {
    HCPINN_REQUIRE(side == Region::Minus || side == Region::Plus, PreconditionError,
                   "hc_jet: side label must be Minus or Plus");
    HCPINN_REQUIRE(classify(*f.geom, x) != Region::OnInterface, PreconditionError,
                   "hc_jet: jets are one-sided; use hc_interface_jump on Gamma");

    const Jet2 phi = f.aux->phi.jet(x, side);
    const Jet2 h = f.aux->h.jet(x, side);
    const Eigen::VectorXd xi = detail::composite_input(f, x, t, phi.value);
    const Jet2 N = mlp_jet(f.core, xi);

    const int it = f.parabolic() ? 2 : -1;   // time slot in xi
    const int ip = f.parabolic() ? 3 : 2;    // phi slot in xi

    // Derivatives of u(x) = N(x[, t], phi(x)) with respect to x.
    Vec2 du;
    Eigen::Matrix2d Hu;
    for (int a = 0; a < 2; ++a) du[a] = N.grad(a) + N.grad(ip) * phi.grad(a);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            Hu(a, b) = N.hess(a, b) + N.hess(a, ip) * phi.grad(b) + N.hess(ip, b) * phi.grad(a) +
                       N.hess(ip, ip) * phi.grad(a) * phi.grad(b) + N.grad(ip) * phi.hess(a, b);

    double fac, dfac;
    f.time_factor(t, fac, dfac);

    HcJet out;
    out.value = fac * h.value * N.value;
    for (int a = 0; a < 2; ++a) out.grad[a] = fac * (h.value * du[a] + N.value * h.grad(a));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            out.hess(a, b) = fac * (h.value * Hu(a, b) + h.grad(a) * du[b] + h.grad(b) * du[a] +
                                    N.value * h.hess(a, b));
    if (f.parabolic()) out.dt = dfac * h.value * N.value + fac * h.value * N.grad(it);

    if (f.has_lift()) {
        if (f.parabolic()) {
            const Jet2 g = f.aux->g_time->jet(x, t, side);  // over (x1, x2, t)
            out.value += g.value;
            out.grad += g.grad.head(2);
            out.hess += g.hess.topLeftCorner(2, 2);
            out.dt += g.grad(2);
        } else {
            const Jet2 g = f.aux->g.jet(x, side);
            out.value += g.value;
            out.grad += g.grad;
            out.hess += g.hess;
        }
    }
    return out;
}

/// Interface quantities at a point of Gamma with outward unit normal n:
/// the value jump [y] and the flux jump [beta dn y], both via one-sided
/// limits realized as branch selection of g and phi (no offsetting).
struct InterfaceJump {
    double value_jump = 0.0;
    double flux_jump = 0.0;
};

inline InterfaceJump hc_interface_jump(const HardConstraintField& f, const Vec2& x, const Vec2& n,
                                       double t = 0.0) {
    HCPINN_REQUIRE(classify(*f.geom, x) == Region::OnInterface, PreconditionError,
                   "hc_interface_jump: point is not on Gamma");
    const auto& geom = *f.geom;
    const double beta_diff = geom.beta_plus - geom.beta_minus;

    const Jet2 phi_p = f.aux->phi.jet(x, Region::Plus);
    const Jet2 phi_m = f.aux->phi.jet(x, Region::Minus);
    const double jphi = geom.beta_plus * n.dot(phi_p.grad) - geom.beta_minus * n.dot(phi_m.grad);

    const Jet2 h = f.aux->h.jet(x, Region::Plus);  // h is one smooth field
    const double dnh = n.dot(h.grad);

    // N and its first derivatives at the (continuous) interface value of
    // phi; the Plus branch fixes the convention.
    const Jet2 N = mlp_jet(f.core, detail::composite_input(f, x, t, phi_p.value));
    const int ip = f.parabolic() ? 3 : 2;
    const double dnN = n[0] * N.grad(0) + n[1] * N.grad(1);

    double fac, dfac;
    f.time_factor(t, fac, dfac);

    InterfaceJump out;
    out.flux_jump = fac * (beta_diff * (N.value * dnh + h.value * dnN) + N.grad(ip) * h.value * jphi);

    // Value jump: h N(x, phi) is continuous up to the phi branch rounding.
    const double n_minus = mlp_eval(f.core, detail::composite_input(f, x, t, phi_m.value));
    out.value_jump = fac * h.value * (N.value - n_minus);

    if (f.has_lift()) {
        if (f.parabolic()) {
            const Jet2 gp = f.aux->g_time->jet(x, t, Region::Plus);
            const Jet2 gm = f.aux->g_time->jet(x, t, Region::Minus);
            out.value_jump += gp.value - gm.value;
            out.flux_jump += geom.beta_plus * (n[0] * gp.grad(0) + n[1] * gp.grad(1)) -
                             geom.beta_minus * (n[0] * gm.grad(0) + n[1] * gm.grad(1));
        } else {
            const Jet2 gp = f.aux->g.jet(x, Region::Plus);
            const Jet2 gm = f.aux->g.jet(x, Region::Minus);
            out.value_jump += gp.value - gm.value;
            out.flux_jump += geom.beta_plus * n.dot(gp.grad) - geom.beta_minus * n.dot(gm.grad);
        }
    }
    return out;
}

}  // namespace hcpinn
