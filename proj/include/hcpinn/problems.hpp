#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "hcpinn/auxfields.hpp"
#include "hcpinn/cjet.hpp"
#include "hcpinn/geometry.hpp"
#include "hcpinn/projection.hpp"

namespace hcpinn {

enum class Variant { DistributedElliptic, InterfaceControl, DistributedParabolic };

/// Pointwise control box; evaluators may return +-infinity for one-sided or
/// absent constraints. For the interface-control variant the bounds live on
/// Gamma, and for the parabolic variant they may depend on t.
struct ControlBounds {
    std::function<double(const Vec2&, double)> lower = [](const Vec2&, double) { return -kUnbounded; };
    std::function<double(const Vec2&, double)> upper = [](const Vec2&, double) { return kUnbounded; };
};

/// One benchmark problem: geometry, data functions, bounds, and (when the
/// solution is manufactured) the exact optimal triple with jets over
/// (x1, x2, t). Elliptic variants ignore t throughout.
struct ProblemSpec {
    std::string id;
    Variant variant = Variant::DistributedElliptic;
    InterfaceGeometry geometry;
    double alpha = 1.0;
    double T = 0.0;

    std::function<double(const Vec2&, double, Region)> f;
    std::function<double(const Vec2&, double, Region)> y_d;
    std::function<double(const Vec2&, double)> g0 = [](const Vec2&, double) { return 0.0; };
    std::function<double(const Vec2&, double)> g1 = [](const Vec2&, double) { return 0.0; };
    std::function<double(const Vec2&, double)> h0 = [](const Vec2&, double) { return 0.0; };
    std::function<double(const Vec2&)> y0 = [](const Vec2&) { return 0.0; };

    ControlBounds bounds;

    bool has_exact = false;
    std::function<CJet(const Vec2&, double, Region)> exact_y, exact_p;
    std::function<double(const Vec2&, double, Region)> exact_u;

    std::function<AuxiliaryField()> option1_aux;

    bool parabolic() const { return variant == Variant::DistributedParabolic; }
};

namespace detail {

inline CJet cj_x(const Vec2& x, int dim) { return CJet::variable(x[0], 0, dim); }
inline CJet cj_y(const Vec2& x, int dim) { return CJet::variable(x[1], 1, dim); }

/// q(x) = (|x|^2 - r0^2)(x1^2 - 1)(x2^2 - 1), the common factor of the
/// manufactured adjoints: it vanishes on Gamma and on the boundary.
inline CJet q_factor(const Vec2& x, double r0, int dim) {
    CJet x1 = cj_x(x, dim), x2 = cj_y(x, dim);
    return (x1 * x1 + x2 * x2 - r0 * r0) * (x1 * x1 - 1.0) * (x2 * x2 - 1.0);
}

/// Hand-expanded Laplacian of q (kept independent of the CJet route so the
/// optimality checks exercise two algebraic paths).
inline double q_laplacian(const Vec2& x, double r0) {
    const double v1 = x[0] * x[0] - 1.0, v2 = x[1] * x[1] - 1.0;
    const double w = x.squaredNorm() - r0 * r0;
    return 4.0 * v1 * v2 + 8.0 * x[0] * x[0] * v2 + 8.0 * x[1] * x[1] * v1 + 2.0 * w * (v1 + v2);
}

/// |x|^3 as a jet; the limit values at the origin are zero.
inline CJet r_cubed(const Vec2& x, int dim) {
    CJet r2 = cj_x(x, dim) * cj_x(x, dim) + cj_y(x, dim) * cj_y(x, dim);
    if (r2.value() == 0.0) return CJet::constant(0.0, dim);
    return pow(r2, 1.5);
}

inline AuxScalar h_product_field() {
    return AuxScalar::closed_form([](const Vec2& x, Region) {
        CJet x1 = cj_x(x, 2), x2 = cj_y(x, 2);
        return (x1 * x1 - 1.0) * (x2 * x2 - 1.0);
    });
}

}  // namespace detail

/// Elliptic benchmark with a circular interface and manufactured solution
/// (distributed control for `interface_control == false`). beta_plus is 10
/// for Example 1 and 5 for the Table-style variant 1b.
inline ProblemSpec make_circle_benchmark(const std::string& id, double beta_plus,
                                         bool interface_control) {
    ProblemSpec spec;
    spec.id = id;
    spec.variant = interface_control ? Variant::InterfaceControl : Variant::DistributedElliptic;
    const double r0 = 0.5;
    spec.geometry = {{-1, -1}, {1, 1}, Circle{r0}, 1.0, beta_plus};
    spec.alpha = 1.0;
    const double bm = 1.0, bp = beta_plus;
    const double K = (1.0 / bm - 1.0 / bp) * r0 * r0 * r0;

    auto beta_of = [bm, bp](Region r) { return r == Region::Minus ? bm : bp; };

    spec.exact_p = [r0, beta_of](const Vec2& x, double, Region side) {
        return (-5.0 / beta_of(side)) * detail::q_factor(x, r0, 3);
    };
    spec.exact_y = [r0, bp, bm, K, beta_of](const Vec2& x, double, Region side) {
        CJet r3 = detail::r_cubed(x, 3);
        return side == Region::Minus ? r3 / bm : r3 / bp + K;
    };

    const double alpha = spec.alpha;
    if (!interface_control) {
        spec.bounds.lower = [](const Vec2&, double) { return -1.0; };
        spec.bounds.upper = [](const Vec2&, double) { return 1.0; };
        auto exact_p = spec.exact_p;
        spec.exact_u = [exact_p, alpha](const Vec2& x, double t, Region side) {
            return project_box(-exact_p(x, t, side).value() / alpha, -1.0, 1.0);
        };
        auto exact_u = spec.exact_u;
        // f = -u* - div(beta grad y*) with div(beta grad y*) = 9 |x|.
        spec.f = [exact_u](const Vec2& x, double t, Region side) {
            return -exact_u(x, t, side) - 9.0 * x.norm();
        };
    } else {
        // Control acts on the flux jump across Gamma; bounds live on Gamma.
        spec.bounds.lower = [](const Vec2& x, double) { return std::sin(2.0 * M_PI * x[0]); };
        spec.bounds.upper = [](const Vec2&, double) { return 1.0; };
        // p* vanishes on Gamma, so u* = P(0) = max(sin(2 pi x1), 0) there,
        // and the state data must absorb it: g1 = -u*.
        spec.exact_u = [](const Vec2& x, double, Region) {
            return project_box(0.0, std::sin(2.0 * M_PI * x[0]), 1.0);
        };
        auto exact_u = spec.exact_u;
        spec.g1 = [exact_u](const Vec2& x, double t) { return -exact_u(x, t, Region::OnInterface); };
        spec.f = [](const Vec2& x, double, Region) { return -9.0 * x.norm(); };
    }

    auto exact_y = spec.exact_y;
    spec.y_d = [exact_y, r0](const Vec2& x, double t, Region side) {
        return exact_y(x, t, side).value() - 5.0 * detail::q_laplacian(x, r0);
    };
    spec.h0 = [bp, K](const Vec2& x, double) {
        return std::pow(x.squaredNorm(), 1.5) / bp + K;
    };

    spec.has_exact = true;

    spec.option1_aux = [bp, K, r0]() {
        AuxiliaryField aux;
        aux.g = AuxScalar::closed_form([bp, K](const Vec2& x, Region) {
            CJet x1 = detail::cj_x(x, 2), x2 = detail::cj_y(x, 2);
            return pow(x1 * x1 * x2 * x2 + 1.0, 1.5) / bp + K;
        });
        aux.h = detail::h_product_field();
        aux.phi = phi_circle(r0);
        aux.h0 = [bp, K](const Vec2& x) { return std::pow(x.squaredNorm(), 1.5) / bp + K; };
        aux.tol_hard = kTolHardClosedForm;
        return aux;
    };
    return spec;
}

/// Star-interface elliptic benchmark (no exact solution).
inline ProblemSpec make_star_benchmark() {
    ProblemSpec spec;
    spec.id = "2";
    spec.variant = Variant::DistributedElliptic;
    spec.geometry = {{-1, -1}, {1, 1}, PolarStar{0.5, 0.2, 5}, 1.0, 10.0};
    spec.alpha = 1.0;
    auto beta_of = [](Region r) { return r == Region::Minus ? 1.0 : 10.0; };
    spec.f = [beta_of](const Vec2& x, double, Region side) {
        return 2.0 * beta_of(side) * (2.0 - x.squaredNorm());
    };
    spec.y_d = [](const Vec2& x, double, Region) {
        return (x[0] * x[0] - 1.0) * (x[1] * x[1] - 1.0);
    };
    // No control constraints are prescribed for this benchmark.
    spec.has_exact = false;

    spec.option1_aux = []() {
        AuxiliaryField aux;
        aux.g = AuxScalar::closed_form([](const Vec2&, Region) { return CJet::constant(0.0, 2); });
        aux.h = detail::h_product_field();
        // Theorem-style construction for the star: one factor
        // psi(x) = a + b sin(5 theta) - r, written with
        // sin(5t) = 16 s^5 - 20 s^3 + 5 s, s = x2 / r, so it stays a jet in
        // Cartesian coordinates away from the origin.
        Theorem32Spec t32;
        t32.psi_list.push_back([](const Vec2& x) {
            CJet x1 = detail::cj_x(x, 2), x2 = detail::cj_y(x, 2);
            CJet r = sqrt(x1 * x1 + x2 * x2);
            CJet s = x2 / r;
            CJet s2 = s * s;
            CJet sin5 = s * (16.0 * s2 * s2 - 20.0 * s2 + 5.0);
            return 0.5 + 0.2 * sin5 - r;
        });
        t32.in_U = [](const Vec2& x) { return x.norm() > 0.05; };
        t32.c_list = {0.24};
        t32.c = 0.2;
        aux.phi = affine_of(phi_theorem32(t32), 1.0, -20.0);
        aux.tol_hard = kTolHardClosedForm;
        return aux;
    };
    return spec;
}

/// Parabolic benchmark over (0, T) with T = pi/2 and beta = (1, 3).
inline ProblemSpec make_parabolic_benchmark() {
    ProblemSpec spec;
    spec.id = "4";
    spec.variant = Variant::DistributedParabolic;
    const double r0 = 0.5;
    spec.geometry = {{-1, -1}, {1, 1}, Circle{r0}, 1.0, 3.0};
    spec.alpha = 1.0;
    spec.T = M_PI / 2.0;
    const double T = spec.T;
    auto beta_of = [](Region r) { return r == Region::Minus ? 1.0 : 3.0; };

    spec.exact_p = [r0, beta_of, T](const Vec2& x, double t, Region side) {
        CJet tt = CJet::variable(t, 2, 3);
        return (5.0 / beta_of(side)) * sin(CJet::constant(T, 3) - tt) * detail::q_factor(x, r0, 3);
    };
    spec.exact_y = [r0, beta_of, T](const Vec2& x, double t, Region side) {
        CJet tt = CJet::variable(t, 2, 3);
        return (5.0 / beta_of(side)) * cos(tt - T) * detail::q_factor(x, r0, 3);
    };
    const double alpha = spec.alpha;
    auto exact_p = spec.exact_p;
    spec.exact_u = [exact_p, alpha](const Vec2& x, double t, Region side) {
        return project_box(-exact_p(x, t, side).value() / alpha, -1.0, 1.0);
    };
    spec.bounds.lower = [](const Vec2&, double) { return -1.0; };
    spec.bounds.upper = [](const Vec2&, double) { return 1.0; };

    auto exact_u = spec.exact_u;
    spec.f = [r0, beta_of, T, exact_u](const Vec2& x, double t, Region side) {
        const double q = detail::q_factor(x, r0, 2).value();
        return 5.0 * std::sin(T - t) * q / beta_of(side) - exact_u(x, t, side) -
               5.0 * std::cos(T - t) * detail::q_laplacian(x, r0);
    };
    spec.y_d = [r0, T](const Vec2& x, double t, Region) {
        return 5.0 * std::sin(T - t) * detail::q_laplacian(x, r0);
    };
    spec.has_exact = true;

    spec.option1_aux = [r0]() {
        AuxiliaryField aux;
        aux.g_time = AuxTimeScalar::zero();
        aux.g = AuxScalar::closed_form([](const Vec2&, Region) { return CJet::constant(0.0, 2); });
        aux.h = detail::h_product_field();
        aux.phi = phi_circle(r0);
        aux.tol_hard = kTolHardClosedForm;
        return aux;
    };
    return spec;
}

/// The paper's benchmark set: "1" and "1b" are the circular-interface
/// distributed problems (beta+ = 10 and 5), "2" the star interface, "3" the
/// interface-control variant, "4" the parabolic one.
inline ProblemSpec build_example(std::string id) {
    if (id.rfind("example", 0) == 0) id = id.substr(7);
    if (id == "1") return make_circle_benchmark("1", 10.0, false);
    if (id == "1b") return make_circle_benchmark("1b", 5.0, false);
    if (id == "2") return make_star_benchmark();
    if (id == "3") return make_circle_benchmark("3", 10.0, true);
    if (id == "4") return make_parabolic_benchmark();
    throw ConfigError("unknown example id: " + id);
}

// ---------------------------------------------------------------------------
// Optimality-system verification of the manufactured solutions
// ---------------------------------------------------------------------------

struct OptimalityReport {
    double max_state_pde = 0.0;
    double max_adjoint_pde = 0.0;
    double max_state_value_jump = 0.0;
    double max_state_flux_jump = 0.0;
    double max_adjoint_value_jump = 0.0;
    double max_adjoint_flux_jump = 0.0;
    double max_state_boundary = 0.0;
    double max_adjoint_boundary = 0.0;
    double max_initial = 0.0;
    double max_terminal = 0.0;
    double max_projection = 0.0;

    double worst() const {
        return std::max({max_state_pde, max_adjoint_pde, max_state_value_jump, max_state_flux_jump,
                         max_adjoint_value_jump, max_adjoint_flux_jump, max_state_boundary,
                         max_adjoint_boundary, max_initial, max_terminal, max_projection});
    }
};

/// Substitutes the exact triple into the variant's optimality system at
/// random points and reports the largest residual of every condition. This
/// validates the transcription of the data functions before any training.
inline OptimalityReport verify_optimality_system(const ProblemSpec& spec, int n_points,
                                                 std::uint64_t seed) {
    HCPINN_REQUIRE(spec.has_exact, UnsupportedError, "verify_optimality_system: no exact solution");
    OptimalityReport rep;
    Rng trng(seed ^ 0x5eedULL);
    auto draw_t = [&]() { return spec.parabolic() ? trng.uniform(1e-3, spec.T - 1e-3) : 0.0; };

    const auto& geom = spec.geometry;
    for (const auto& p : sample_interior(geom, n_points, seed)) {
        const double t = draw_t();
        const double beta = geom.beta(p.region);
        const CJet y = spec.exact_y(p.x, t, p.region);
        const CJet pj = spec.exact_p(p.x, t, p.region);
        const double u = spec.exact_u(p.x, t, p.region);

        double state;
        if (spec.variant == Variant::InterfaceControl)
            state = -beta * y.laplacian(2) - spec.f(p.x, t, p.region);
        else if (spec.variant == Variant::DistributedParabolic)
            state = y.grad(2) - beta * y.laplacian(2) - u - spec.f(p.x, t, p.region);
        else
            state = -beta * y.laplacian(2) - u - spec.f(p.x, t, p.region);
        rep.max_state_pde = std::max(rep.max_state_pde, std::abs(state));

        double adj;
        if (spec.variant == Variant::DistributedParabolic)
            adj = -pj.grad(2) - beta * pj.laplacian(2) - (y.value() - spec.y_d(p.x, t, p.region));
        else
            adj = -beta * pj.laplacian(2) - (y.value() - spec.y_d(p.x, t, p.region));
        rep.max_adjoint_pde = std::max(rep.max_adjoint_pde, std::abs(adj));

        if (spec.variant != Variant::InterfaceControl) {
            const double proj =
                u - project_box(-pj.value() / spec.alpha, spec.bounds.lower(p.x, t), spec.bounds.upper(p.x, t));
            rep.max_projection = std::max(rep.max_projection, std::abs(proj));
        }
    }

    for (const auto& s : sample_interface(geom, n_points, seed + 1)) {
        const double t = draw_t();
        const CJet yp = spec.exact_y(s.x, t, Region::Plus), ym = spec.exact_y(s.x, t, Region::Minus);
        const CJet pp = spec.exact_p(s.x, t, Region::Plus), pm = spec.exact_p(s.x, t, Region::Minus);
        auto ndot = [&](const CJet& j) { return s.normal[0] * j.grad(0) + s.normal[1] * j.grad(1); };
        rep.max_state_value_jump =
            std::max(rep.max_state_value_jump, std::abs(yp.value() - ym.value() - spec.g0(s.x, t)));
        double flux_target = spec.g1(s.x, t);
        if (spec.variant == Variant::InterfaceControl)
            flux_target += spec.exact_u(s.x, t, Region::OnInterface);
        rep.max_state_flux_jump = std::max(
            rep.max_state_flux_jump,
            std::abs(geom.beta_plus * ndot(yp) - geom.beta_minus * ndot(ym) - flux_target));
        rep.max_adjoint_value_jump =
            std::max(rep.max_adjoint_value_jump, std::abs(pp.value() - pm.value()));
        rep.max_adjoint_flux_jump = std::max(
            rep.max_adjoint_flux_jump, std::abs(geom.beta_plus * ndot(pp) - geom.beta_minus * ndot(pm)));
        if (spec.variant == Variant::InterfaceControl) {
            const double proj = spec.exact_u(s.x, t, Region::OnInterface) -
                                project_box(-pp.value() / spec.alpha, spec.bounds.lower(s.x, t),
                                            spec.bounds.upper(s.x, t));
            rep.max_projection = std::max(rep.max_projection, std::abs(proj));
        }
    }

    for (const auto& x : sample_boundary(geom, n_points, seed + 2)) {
        const double t = draw_t();
        rep.max_state_boundary = std::max(
            rep.max_state_boundary, std::abs(spec.exact_y(x, t, Region::Plus).value() - spec.h0(x, t)));
        rep.max_adjoint_boundary =
            std::max(rep.max_adjoint_boundary, std::abs(spec.exact_p(x, t, Region::Plus).value()));
    }

    if (spec.parabolic()) {
        for (const auto& p : sample_interior(geom, n_points, seed + 3)) {
            rep.max_initial = std::max(
                rep.max_initial, std::abs(spec.exact_y(p.x, 0.0, p.region).value() - spec.y0(p.x)));
            rep.max_terminal =
                std::max(rep.max_terminal, std::abs(spec.exact_p(p.x, spec.T, p.region).value()));
        }
    }
    return rep;
}

}  // namespace hcpinn
