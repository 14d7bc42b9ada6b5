#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "hcpinn/errors.hpp"
#include "hcpinn/rng.hpp"

namespace hcpinn {

using Vec2 = Eigen::Vector2d;

enum class Region { Minus, Plus, OnInterface, OnBoundary };

inline constexpr double kInterfaceTol = 1e-10;  // |psi| below this counts as on-interface
inline constexpr double kBoundaryTol = 1e-12;   // boundary points carry exact coordinates

// Interface shapes. The level-set orientation convention is psi < 0 inside
// (Omega^-) and psi > 0 outside, so n = grad(psi)/|grad(psi)| points outward.
struct Circle {
    double r0;
};
struct Box {
    Vec2 lo, hi;
};
struct PolarStar {  // r = a + b*sin(k*theta)
    double a, b;
    int k;
};
struct LevelSet {  // no parametrization: classification/normals only
    std::function<double(const Vec2&)> psi;
    std::function<Vec2(const Vec2&)> grad;
};

using Interface = std::variant<Circle, Box, PolarStar, LevelSet>;

struct InterfaceGeometry {
    Vec2 domain_lo, domain_hi;
    Interface interface;
    double beta_minus = 1.0;
    double beta_plus = 1.0;

    double beta(Region r) const { return r == Region::Minus ? beta_minus : beta_plus; }
    double area() const { return (domain_hi - domain_lo).prod(); }
};

/// Signed interface residual (the "interface equation"): negative inside.
inline double interface_residual(const InterfaceGeometry& g, const Vec2& x) {
    return std::visit(
        [&x](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return x.norm() - s.r0;
            } else if constexpr (std::is_same_v<T, Box>) {
                double worst = -std::numeric_limits<double>::infinity();
                for (int i = 0; i < 2; ++i)
                    worst = std::max({worst, s.lo[i] - x[i], x[i] - s.hi[i]});
                return worst;
            } else if constexpr (std::is_same_v<T, PolarStar>) {
                const double r = x.norm();
                const double theta = std::atan2(x[1], x[0]);
                return r - s.a - s.b * std::sin(s.k * theta);
            } else {
                return s.psi(x);
            }
        },
        g.interface);
}

inline bool in_closure(const InterfaceGeometry& g, const Vec2& x) {
    return x[0] >= g.domain_lo[0] && x[0] <= g.domain_hi[0] && x[1] >= g.domain_lo[1] &&
           x[1] <= g.domain_hi[1];
}

inline bool on_outer_boundary(const InterfaceGeometry& g, const Vec2& x) {
    for (int i = 0; i < 2; ++i)
        if (std::abs(x[i] - g.domain_lo[i]) <= kBoundaryTol || std::abs(x[i] - g.domain_hi[i]) <= kBoundaryTol)
            return true;
    return false;
}

inline Region classify(const InterfaceGeometry& g, const Vec2& x) {
    HCPINN_REQUIRE(in_closure(g, x), DomainError, "classify: point outside the closed domain");
    if (on_outer_boundary(g, x)) return Region::OnBoundary;
    const double psi = interface_residual(g, x);
    if (std::abs(psi) <= kInterfaceTol) return Region::OnInterface;
    return psi < 0.0 ? Region::Minus : Region::Plus;
}

/// Outward unit normal of Gamma (from Omega^- into Omega^+) at a point on it.
inline Vec2 unit_normal(const InterfaceGeometry& g, const Vec2& x) {
    HCPINN_REQUIRE(classify(g, x) == Region::OnInterface, PreconditionError,
                   "unit_normal: point is not on the interface");
    Vec2 n = std::visit(
        [&x](const auto& s) -> Vec2 {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                return x.normalized();
            } else if constexpr (std::is_same_v<T, Box>) {
                // Outward along the face the point sits on; corners take the
                // first matching axis (a measure-zero set).
                for (int i = 0; i < 2; ++i) {
                    if (std::abs(x[i] - s.lo[i]) <= kInterfaceTol) {
                        Vec2 n = Vec2::Zero();
                        n[i] = -1.0;
                        return n;
                    }
                    if (std::abs(x[i] - s.hi[i]) <= kInterfaceTol) {
                        Vec2 n = Vec2::Zero();
                        n[i] = 1.0;
                        return n;
                    }
                }
                throw PreconditionError("unit_normal: box point not on any face");
            } else if constexpr (std::is_same_v<T, PolarStar>) {
                const double r = x.norm();
                const double theta = std::atan2(x[1], x[0]);
                const Vec2 rhat(std::cos(theta), std::sin(theta));
                const Vec2 that(-std::sin(theta), std::cos(theta));
                return rhat - (s.b * s.k * std::cos(s.k * theta) / r) * that;
            } else {
                return s.grad(x);
            }
        },
        g.interface);
    return n.normalized();
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Latin hypercube sample of `count` points in the box [lo, hi]:
/// each axis gets one point per stratum.
inline std::vector<Vec2> sample_lhs(const Vec2& lo, const Vec2& hi, int count, std::uint64_t seed) {
    HCPINN_REQUIRE(count >= 1, PreconditionError, "sample_lhs: count must be >= 1");
    Rng rng(seed);
    std::vector<Vec2> pts(static_cast<std::size_t>(count));
    for (int axis = 0; axis < 2; ++axis) {
        const auto perm = rng.permutation(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const double u = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + rng.uniform()) / count;
            pts[static_cast<std::size_t>(i)][axis] = lo[axis] + (hi[axis] - lo[axis]) * u;
        }
    }
    return pts;
}

struct InterfaceSample {
    Vec2 x;
    Vec2 normal;
};

namespace detail {

/// Largest-remainder apportionment of `count` over segment lengths.
inline std::vector<int> apportion(const std::vector<double>& lengths, int count) {
    const double total = [&] {
        double t = 0;
        for (double l : lengths) t += l;
        return t;
    }();
    std::vector<int> n(lengths.size(), 0);
    std::vector<std::pair<double, std::size_t>> rem;
    int assigned = 0;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        const double share = count * lengths[i] / total;
        n[i] = static_cast<int>(share);
        assigned += n[i];
        rem.emplace_back(share - n[i], i);
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (int k = 0; assigned < count; ++k, ++assigned) n[rem[static_cast<std::size_t>(k)].second] += 1;
    return n;
}

}  // namespace detail

/// Points exactly on Gamma with their outward unit normals. Circle and star
/// interfaces sample the polar angle uniformly at random; boxes allocate
/// per edge by arclength. LevelSet interfaces have no parametrization.
inline std::vector<InterfaceSample> sample_interface(const InterfaceGeometry& g, int count,
                                                     std::uint64_t seed) {
    HCPINN_REQUIRE(count >= 1, PreconditionError, "sample_interface: count must be >= 1");
    Rng rng(seed);
    std::vector<InterfaceSample> out;
    out.reserve(static_cast<std::size_t>(count));
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                for (int i = 0; i < count; ++i) {
                    const double theta = rng.uniform(0.0, 2.0 * M_PI);
                    const Vec2 x(s.r0 * std::cos(theta), s.r0 * std::sin(theta));
                    out.push_back({x, unit_normal(g, x)});
                }
            } else if constexpr (std::is_same_v<T, PolarStar>) {
                for (int i = 0; i < count; ++i) {
                    const double theta = rng.uniform(0.0, 2.0 * M_PI);
                    const double r = s.a + s.b * std::sin(s.k * theta);
                    const Vec2 x(r * std::cos(theta), r * std::sin(theta));
                    out.push_back({x, unit_normal(g, x)});
                }
            } else if constexpr (std::is_same_v<T, Box>) {
                const double w = s.hi[0] - s.lo[0], h = s.hi[1] - s.lo[1];
                const auto counts = detail::apportion({w, h, w, h}, count);
                for (int edge = 0; edge < 4; ++edge) {
                    for (int i = 0; i < counts[static_cast<std::size_t>(edge)]; ++i) {
                        const double u = rng.uniform();
                        Vec2 x, n;
                        switch (edge) {
                            case 0: x = {s.lo[0] + u * w, s.lo[1]}; n = {0, -1}; break;
                            case 1: x = {s.hi[0], s.lo[1] + u * h}; n = {1, 0}; break;
                            case 2: x = {s.lo[0] + u * w, s.hi[1]}; n = {0, 1}; break;
                            default: x = {s.lo[0], s.lo[1] + u * h}; n = {-1, 0}; break;
                        }
                        out.push_back({x, n});
                    }
                }
            } else {
                throw UnsupportedError("sample_interface: LevelSet interfaces have no parametrization");
            }
        },
        g.interface);
    return out;
}

/// Boundary points of the rectangular domain; the pinned coordinate is
/// written exactly so hard-constraint factors vanish identically there.
inline std::vector<Vec2> sample_boundary(const InterfaceGeometry& g, int count, std::uint64_t seed) {
    HCPINN_REQUIRE(count >= 1, PreconditionError, "sample_boundary: count must be >= 1");
    Rng rng(seed);
    const double w = g.domain_hi[0] - g.domain_lo[0], h = g.domain_hi[1] - g.domain_lo[1];
    const auto counts = detail::apportion({w, h, w, h}, count);
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int edge = 0; edge < 4; ++edge) {
        for (int i = 0; i < counts[static_cast<std::size_t>(edge)]; ++i) {
            const double u = rng.uniform();
            switch (edge) {
                case 0: out.emplace_back(g.domain_lo[0] + u * w, g.domain_lo[1]); break;
                case 1: out.emplace_back(g.domain_hi[0], g.domain_lo[1] + u * h); break;
                case 2: out.emplace_back(g.domain_lo[0] + u * w, g.domain_hi[1]); break;
                default: out.emplace_back(g.domain_lo[0], g.domain_lo[1] + u * h); break;
            }
        }
    }
    return out;
}

struct LabeledPoint {
    Vec2 x;
    Region region;  // Minus or Plus only
};

/// Latin hypercube interior sample; points landing within the interface or
/// boundary tolerance are redrawn so every label is unambiguous.
inline std::vector<LabeledPoint> sample_interior(const InterfaceGeometry& g, int count,
                                                 std::uint64_t seed) {
    auto pts = sample_lhs(g.domain_lo, g.domain_hi, count, seed);
    Rng redraw = Rng(seed).fork(17);
    std::vector<LabeledPoint> out;
    out.reserve(pts.size());
    for (auto& x : pts) {
        Region r = classify(g, x);
        while (r == Region::OnInterface || r == Region::OnBoundary) {
            x = {redraw.uniform(g.domain_lo[0], g.domain_hi[0]), redraw.uniform(g.domain_lo[1], g.domain_hi[1])};
            r = classify(g, x);
        }
        out.push_back({x, r});
    }
    return out;
}

/// Chebyshev-Gauss nodes mapped to (0, T):
/// t_i = (T/2) (1 - cos((2i-1) pi / (2 count))), i = 1..count.
inline std::vector<double> sample_chebyshev_time(double T, int count) {
    HCPINN_REQUIRE(count >= 1 && T > 0.0, PreconditionError, "sample_chebyshev_time: need count >= 1, T > 0");
    std::vector<double> t(static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i)
        t[static_cast<std::size_t>(i - 1)] = 0.5 * T * (1.0 - std::cos((2.0 * i - 1.0) * M_PI / (2.0 * count)));
    return t;
}

/// Collocation sets used by one training run.
struct SampleSet {
    std::vector<LabeledPoint> interior;
    std::vector<Vec2> boundary;
    std::vector<InterfaceSample> interface_pts;
    std::vector<double> times;  // empty for stationary problems

    void to_csv(const std::string& path) const {
        std::ofstream out(path);
        HCPINN_REQUIRE(out.good(), ConfigError, "cannot write sample CSV: " + path);
        out.precision(17);
        out << "x1,x2,label\n";
        for (const auto& p : interior)
            out << p.x[0] << "," << p.x[1] << "," << (p.region == Region::Minus ? -1 : 1) << "\n";
        for (const auto& p : boundary) out << p[0] << "," << p[1] << ",B\n";
        for (const auto& p : interface_pts) out << p.x[0] << "," << p.x[1] << ",G\n";
    }
};

}  // namespace hcpinn
