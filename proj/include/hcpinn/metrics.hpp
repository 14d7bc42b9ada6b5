#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "hcpinn/geometry.hpp"
#include "hcpinn/problems.hpp"

namespace hcpinn {

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Integral of v over the rectangular domain, split along the circular
/// interface (when present) so the integrand is smooth on each panel.
/// Control fields have kinks across Gamma and along the projection's
/// active-set boundaries; the first split is structural, the rest is left
/// to the adaptive refinement.
inline double integrate_domain(const InterfaceGeometry& geom,
                               const std::function<double(const Vec2&)>& v, double tol = 1e-9) {
    const Circle* circle = std::get_if<Circle>(&geom.interface);
    auto inner = [&](double x1) {
        auto fx2 = [&](double x2) { return v(Vec2(x1, x2)); };
        const double lo = geom.domain_lo[1], hi = geom.domain_hi[1];
        if (circle && std::abs(x1) < circle->r0) {
            const double half = std::sqrt(circle->r0 * circle->r0 - x1 * x1);
            return adaptive_simpson(fx2, lo, -half, tol) + adaptive_simpson(fx2, -half, half, tol) +
                   adaptive_simpson(fx2, half, hi, tol);
        }
        return adaptive_simpson(fx2, lo, hi, tol);
    };
    const double lo = geom.domain_lo[0], hi = geom.domain_hi[0];
    if (circle)
        return adaptive_simpson(inner, lo, -circle->r0, tol) +
               adaptive_simpson(inner, -circle->r0, circle->r0, tol) +
               adaptive_simpson(inner, circle->r0, hi, tol);
    return adaptive_simpson(inner, lo, hi, tol);
}

// ---------------------------------------------------------------------------
// L2 errors of a computed field against the exact one
// ---------------------------------------------------------------------------

struct L2Errors {
    double abs = 0.0;
    double rel = 0.0;
    double exact_norm = 0.0;  // L2 norm of the exact field over its domain
};

namespace detail {

inline Region side_of(const InterfaceGeometry& g, const Vec2& x) {
    const Region r = classify(g, x);
    // Nodes exactly on Gamma take the Plus branch (one-sided convention of
    // the piecewise extension); boundary nodes lie in closure(Omega^+).
    if (r == Region::OnInterface || r == Region::OnBoundary) return Region::Plus;
    return r;
}

}  // namespace detail

/// RMS error over Latin-hypercube test points (default 256 x 256) plus the
/// relative error eps_abs * sqrt(A(Omega)) / ||u*||_{L2}; the norm comes
/// from adaptive quadrature split along Gamma.
inline L2Errors l2_errors(const std::function<double(const Vec2&, Region)>& computed,
                          const std::function<double(const Vec2&, Region)>& exact,
                          const InterfaceGeometry& geom, int m_t = 256 * 256,
                          std::uint64_t seed = 20240601) {
    HCPINN_REQUIRE(m_t >= 1, PreconditionError, "l2_errors: need at least one test point");
    L2Errors out;
    double sq = 0.0;
    const auto pts = sample_lhs(geom.domain_lo, geom.domain_hi, m_t, seed);
    for (const auto& x : pts) {
        const Region side = detail::side_of(geom, x);
        const double d = computed(x, side) - exact(x, side);
        sq += d * d;
    }
    out.abs = std::sqrt(sq / static_cast<double>(m_t));
    const double norm2 = integrate_domain(geom, [&](const Vec2& x) {
        const double e = exact(x, detail::side_of(geom, x));
        return e * e;
    });
    out.exact_norm = std::sqrt(std::max(norm2, 0.0));
    out.rel = out.abs * std::sqrt(geom.area()) / out.exact_norm;
    return out;
}

/// Interface-control variant: test points and the norm both live on Gamma.
inline L2Errors l2_errors_on_interface(const std::function<double(const Vec2&)>& computed,
                                       const std::function<double(const Vec2&)>& exact,
                                       const InterfaceGeometry& geom, int m_t = 4096,
                                       std::uint64_t seed = 20240601) {
    const Circle* circle = std::get_if<Circle>(&geom.interface);
    HCPINN_REQUIRE(circle != nullptr, UnsupportedError,
                   "l2_errors_on_interface: implemented for circular interfaces");
    L2Errors out;
    double sq = 0.0;
    const auto samples = sample_interface(geom, m_t, seed);
    for (const auto& s : samples) {
        const double d = computed(s.x) - exact(s.x);
        sq += d * d;
    }
    out.abs = std::sqrt(sq / static_cast<double>(m_t));
    const double r0 = circle->r0;
    const double norm2 = adaptive_simpson(
        [&](double theta) {
            const Vec2 x(r0 * std::cos(theta), r0 * std::sin(theta));
            const double e = exact(x);
            return e * e * r0;
        },
        0.0, 2.0 * M_PI, 1e-11);
    out.exact_norm = std::sqrt(std::max(norm2, 0.0));
    out.rel = out.abs * std::sqrt(2.0 * M_PI * r0) / out.exact_norm;
    return out;
}

// ---------------------------------------------------------------------------
// Uniform-grid evaluation (plot/report tables)
// ---------------------------------------------------------------------------

struct GridRow {
    Vec2 x;
    Region region;
    double value = 0.0;
    double exact = 0.0;
    double abs_error = 0.0;
};

struct GridTable {
    int n = 0;
    bool has_exact = false;
    std::vector<GridRow> rows;
    double rms_error = 0.0;
    /// Grid L2 norm of the error: rms times sqrt(cell area * node count),
    /// i.e. rms * sqrt(A(Omega)).
    double l2_error = 0.0;

    void to_csv(const std::string& path) const {
        std::ofstream out(path);
        HCPINN_REQUIRE(out.good(), ConfigError, "cannot write grid CSV: " + path);
        out.precision(17);
        out << "x1,x2,region,value";
        if (has_exact) out << ",exact,abs_error";
        out << "\n";
        for (const auto& r : rows) {
            out << r.x[0] << "," << r.x[1] << "," << (r.region == Region::Minus ? -1 : 1) << ","
                << r.value;
            if (has_exact) out << "," << r.exact << "," << r.abs_error;
            out << "\n";
        }
    }
};

/// N x N nodal evaluation over the closed domain. Nodes on Gamma use the
/// Plus branch.
inline GridTable grid_eval(const std::function<double(const Vec2&, Region)>& field,
                           const InterfaceGeometry& geom, int n,
                           const std::function<double(const Vec2&, Region)>& exact = {}) {
    HCPINN_REQUIRE(n >= 2, PreconditionError, "grid_eval: need n >= 2");
    GridTable table;
    table.n = n;
    table.has_exact = static_cast<bool>(exact);
    table.rows.reserve(static_cast<std::size_t>(n) * n);
    double sq = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            Vec2 x(geom.domain_lo[0] + (geom.domain_hi[0] - geom.domain_lo[0]) * i / (n - 1.0),
                   geom.domain_lo[1] + (geom.domain_hi[1] - geom.domain_lo[1]) * j / (n - 1.0));
            GridRow row;
            row.x = x;
            row.region = detail::side_of(geom, x);
            row.value = field(x, row.region);
            if (table.has_exact) {
                row.exact = exact(x, row.region);
                row.abs_error = std::abs(row.value - row.exact);
                sq += row.abs_error * row.abs_error;
            }
            table.rows.push_back(row);
        }
    }
    if (table.has_exact) {
        table.rms_error = std::sqrt(sq / static_cast<double>(table.rows.size()));
        table.l2_error = table.rms_error * std::sqrt(geom.area());
    }
    return table;
}

}  // namespace hcpinn
