#pragma once

#include <cstdio>
#include <functional>
#include <optional>
#include <utility>

#include "hcpinn/cjet.hpp"
#include "hcpinn/geometry.hpp"
#include "hcpinn/lanes.hpp"
#include "hcpinn/mlp.hpp"
#include "hcpinn/optim.hpp"

namespace hcpinn {

// ---------------------------------------------------------------------------
// The (g, h, phi) triple behind the hard-constraint composites:
//   g lifts the boundary values and the interface value jump,
//   h vanishes exactly on the outer boundary and nowhere else,
//   phi is continuous across Gamma with a nonzero beta-weighted normal
//   derivative jump, and feeds the core network as an extra input.
// Each field is either a closed form (jets via CJet) or a pretrained
// network (plain MLP, or a DCSNN taking the side label z as extra input).
// ---------------------------------------------------------------------------

inline constexpr double kTolHardClosedForm = 1e-12;
inline constexpr double kTolHardNetwork = 1e-3;
inline constexpr double kPhiFluxFloor = 1e-3;  // delta_phi in the a.e. nonzero check

class AuxScalar {
  public:
    AuxScalar() = default;

    static AuxScalar closed_form(std::function<CJet(const Vec2&, Region)> f) {
        AuxScalar a;
        a.closed_ = std::move(f);
        return a;
    }
    static AuxScalar network_plain(MlpParams net) {
        AuxScalar a;
        HCPINN_REQUIRE(net.input_dim() == 2, ShapeError, "plain aux network must take (x1,x2)");
        a.net_ = std::move(net);
        return a;
    }
    static AuxScalar network_dcsnn(MlpParams net) {
        AuxScalar a;
        HCPINN_REQUIRE(net.input_dim() == 3, ShapeError, "DCSNN aux network must take (x1,x2,z)");
        a.net_ = std::move(net);
        a.dcsnn_ = true;
        return a;
    }

    bool is_closed_form() const { return static_cast<bool>(closed_); }
    bool is_dcsnn() const { return dcsnn_; }
    const MlpParams& network() const { return *net_; }

    /// Jet with respect to x on the requested side of Gamma.
    Jet2 jet(const Vec2& x, Region side) const {
        if (closed_) return closed_(x, side).to_jet2();
        if (!dcsnn_) return mlp_jet(*net_, x);
        Eigen::Vector3d xz(x[0], x[1], side == Region::Minus ? -1.0 : 1.0);
        const Jet2 full = mlp_jet(*net_, xz);
        Jet2 out(2);
        out.value = full.value;
        out.grad = full.grad.head(2);
        out.hess = full.hess.topLeftCorner(2, 2);
        return out;
    }

    double value(const Vec2& x, Region side) const {
        if (closed_) return closed_(x, side).value();
        if (!dcsnn_) return mlp_eval(*net_, x);
        return mlp_eval(*net_, Eigen::Vector3d(x[0], x[1], side == Region::Minus ? -1.0 : 1.0));
    }

  private:
    std::function<CJet(const Vec2&, Region)> closed_;
    std::optional<MlpParams> net_;
    bool dcsnn_ = false;
};

/// Time-dependent lift g(x, t) for the parabolic composites. Closed form
/// only; jets are over (x1, x2, t).
class AuxTimeScalar {
  public:
    AuxTimeScalar() = default;
    static AuxTimeScalar closed_form(std::function<CJet(const Vec2&, double, Region)> f) {
        AuxTimeScalar a;
        a.closed_ = std::move(f);
        return a;
    }
    static AuxTimeScalar zero() {
        return closed_form([](const Vec2&, double, Region) { return CJet::constant(0.0, 3); });
    }
    Jet2 jet(const Vec2& x, double t, Region side) const { return closed_(x, t, side).to_jet2(); }
    double value(const Vec2& x, double t, Region side) const { return closed_(x, t, side).value(); }

  private:
    std::function<CJet(const Vec2&, double, Region)> closed_;
};

struct AuxiliaryField {
    AuxScalar g;
    AuxScalar h;
    AuxScalar phi;
    std::optional<AuxTimeScalar> g_time;  // set for parabolic problems

    std::function<double(const Vec2&)> h0 = [](const Vec2&) { return 0.0; };  // boundary target
    std::function<double(const Vec2&)> g0 = [](const Vec2&) { return 0.0; };  // jump target
    double tol_hard = kTolHardClosedForm;
    /// Declared measure-zero subset of Gamma excluded from the
    /// nonzero-flux-jump check (box corners and similar double zeros).
    std::function<bool(const Vec2&)> degenerate_on_interface;

    double phi_flux_jump(const InterfaceGeometry& geom, const Vec2& x, const Vec2& n) const {
        const Jet2 jp = phi.jet(x, Region::Plus);
        const Jet2 jm = phi.jet(x, Region::Minus);
        return geom.beta_plus * n.dot(jp.grad) - geom.beta_minus * n.dot(jm.grad);
    }
    double g_flux_jump(const InterfaceGeometry& geom, const Vec2& x, const Vec2& n) const {
        const Jet2 jp = g.jet(x, Region::Plus);
        const Jet2 jm = g.jet(x, Region::Minus);
        return geom.beta_plus * n.dot(jp.grad) - geom.beta_minus * n.dot(jm.grad);
    }
};

// ---------------------------------------------------------------------------
// Closed-form constructions
// ---------------------------------------------------------------------------

/// Circle interface of radius r0: phi = |x|^2 / r0^2 inside, 1 outside, so
/// phi == 1 on Gamma and [beta dn phi] = -2 beta^- / r0.
inline AuxScalar phi_circle(double r0) {
    HCPINN_REQUIRE(r0 > 0.0, PreconditionError, "phi_circle: r0 must be positive");
    return AuxScalar::closed_form([r0](const Vec2& x, Region side) {
        if (side == Region::Minus) {
            CJet x1 = CJet::variable(x[0], 0, 2), x2 = CJet::variable(x[1], 1, 2);
            return (x1 * x1 + x2 * x2) / (r0 * r0);
        }
        return CJet::constant(1.0, 2);
    });
}

/// Box interface: product of the per-face distance factors inside, 0 outside.
/// The flux jump vanishes only at the corners.
inline AuxScalar phi_box(const Vec2& lo, const Vec2& hi) {
    return AuxScalar::closed_form([lo, hi](const Vec2& x, Region side) {
        if (side != Region::Minus) return CJet::constant(0.0, 2);
        CJet prod = CJet::constant(1.0, 2);
        for (int i = 0; i < 2; ++i) {
            CJet xi = CJet::variable(x[i], i, 2);
            prod = prod * (xi - lo[i]) * (hi[i] - xi);
        }
        return prod;
    });
}

/// Factor list for the general level-set construction: each psi_i is C^2 on
/// a neighborhood U of Gamma, positive on U cap Omega^-, with constants
/// psi_i > c_i on (boundary of U) cap closure(Omega^-).
struct Theorem32Spec {
    std::vector<std::function<CJet(const Vec2&)>> psi_list;
    std::function<bool(const Vec2&)> in_U;
    std::vector<double> c_list;
    double c = 0.0;

    void validate() const {
        HCPINN_REQUIRE(!psi_list.empty() && psi_list.size() == c_list.size(), PreconditionError,
                       "Theorem32Spec: psi and c lists must match");
        double prod = 1.0;
        for (double ci : c_list) {
            HCPINN_REQUIRE(ci > 0.0, PreconditionError, "Theorem32Spec: c_i must be positive");
            prod *= ci;
        }
        HCPINN_REQUIRE(c > 0.0 && c < prod, PreconditionError,
                       "Theorem32Spec: need 0 < c < prod(c_i)");
    }
};

/// Piecewise construction
///   phi = c^3                 deep inside (outside U or where psi >= c),
///   phi = c^3 - (c - psi)^3   in the collar (U cap Omega^-) with psi < c,
///   phi = 0                   on closure(Omega^+),
/// with psi = prod psi_i. Continuous across Gamma and the clamp boundary,
/// with first/second derivatives vanishing at the clamp boundary.
inline AuxScalar phi_theorem32(const Theorem32Spec& spec) {
    spec.validate();
    return AuxScalar::closed_form([spec](const Vec2& x, Region side) {
        const double c3 = spec.c * spec.c * spec.c;
        if (side != Region::Minus) return CJet::constant(0.0, 2);
        if (spec.in_U && !spec.in_U(x)) return CJet::constant(c3, 2);
        CJet psi = spec.psi_list[0](x);
        for (std::size_t i = 1; i < spec.psi_list.size(); ++i) psi = psi * spec.psi_list[i](x);
        if (psi.value() >= spec.c) return CJet::constant(c3, 2);
        return c3 - cube(spec.c - psi);
    });
}

/// a + b * phi, keeping the backing's jets.
inline AuxScalar affine_of(const AuxScalar& base, double a, double b) {
    return AuxScalar::closed_form([base, a, b](const Vec2& x, Region side) {
        const Jet2 j = base.jet(x, side);
        return CJet::from_parts(a + b * j.value, b * j.grad, b * j.hess);
    });
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct AuxReport {
    double max_g_boundary_residual = 0.0;  // |g - h0| on the outer boundary
    double max_g_jump_residual = 0.0;      // |[g] - g0| on Gamma
    double max_h_boundary = 0.0;           // |h| on the outer boundary
    double min_h_interior = 0.0;           // min |h| over interior samples
    double max_phi_jump = 0.0;             // |[phi]| on Gamma
    double min_phi_flux_jump = 0.0;        // min |[beta dn phi]| outside the declared null set
    int excluded_interface_points = 0;
    bool pass = false;

    std::string summary() const {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "g|bnd %.3e  [g]-g0 %.3e  h|bnd %.3e  min|h| %.3e  [phi] %.3e  "
                      "min|[b dn phi]| %.3e  %s",
                      max_g_boundary_residual, max_g_jump_residual, max_h_boundary, min_h_interior,
                      max_phi_jump, min_phi_flux_jump, pass ? "PASS" : "FAIL");
        return buf;
    }
};

/// Checks the defining properties of the triple on fresh samples.
inline AuxReport verify_aux(const AuxiliaryField& field, const InterfaceGeometry& geom, int n_samples,
                            std::uint64_t seed) {
    HCPINN_REQUIRE(n_samples >= 1, PreconditionError, "verify_aux: n_samples must be >= 1");
    AuxReport rep;
    rep.min_h_interior = std::numeric_limits<double>::infinity();
    rep.min_phi_flux_jump = std::numeric_limits<double>::infinity();

    const auto boundary = sample_boundary(geom, n_samples, seed);
    for (const auto& x : boundary) {
        rep.max_g_boundary_residual =
            std::max(rep.max_g_boundary_residual, std::abs(field.g.value(x, Region::Plus) - field.h0(x)));
        rep.max_h_boundary = std::max(rep.max_h_boundary, std::abs(field.h.value(x, Region::Plus)));
    }
    const auto interface = sample_interface(geom, n_samples, seed + 1);
    for (const auto& s : interface) {
        const double gj =
            field.g.value(s.x, Region::Plus) - field.g.value(s.x, Region::Minus) - field.g0(s.x);
        rep.max_g_jump_residual = std::max(rep.max_g_jump_residual, std::abs(gj));
        const double pj = field.phi.value(s.x, Region::Plus) - field.phi.value(s.x, Region::Minus);
        rep.max_phi_jump = std::max(rep.max_phi_jump, std::abs(pj));
        if (field.degenerate_on_interface && field.degenerate_on_interface(s.x)) {
            ++rep.excluded_interface_points;
            continue;
        }
        rep.min_phi_flux_jump =
            std::min(rep.min_phi_flux_jump, std::abs(field.phi_flux_jump(geom, s.x, s.normal)));
    }
    for (const auto& p : sample_interior(geom, n_samples, seed + 2))
        rep.min_h_interior = std::min(rep.min_h_interior, std::abs(field.h.value(p.x, p.region)));

    rep.pass = rep.max_g_boundary_residual <= field.tol_hard && rep.max_g_jump_residual <= field.tol_hard &&
               rep.max_h_boundary <= field.tol_hard && rep.min_h_interior > 0.0 &&
               rep.max_phi_jump <= field.tol_hard && rep.min_phi_flux_jump > kPhiFluxFloor;
    return rep;
}

// ---------------------------------------------------------------------------
// Pretraining (Option II): the three small networks behind g, h, phi.
// ---------------------------------------------------------------------------

namespace detail {

/// Shared scaffolding: full-batch objective over one network where every
/// term is a mean of squared residuals of values or directional
/// derivatives. All sites run as one lane batch per evaluation.
class ValueGradObjective : public Objective {
  public:
    struct Site {
        Eigen::VectorXd input;      // network input
        Eigen::VectorXd direction;  // nonempty: the site's output is grad . direction
        double target = 0.0;
        double weight = 1.0;  // premultiplied group weight / group size
        int group = 0;
        double scale = 1.0;
        int pair_with = -1;        // residual = scale*out + pair_scale*out[pair] - target
        double pair_scale = -1.0;  // default: plain differences (jumps)
    };

    ValueGradObjective(const MlpParams& prototype, std::vector<Site> sites,
                       std::vector<std::string> names)
        : net_(prototype),
          sites_(std::move(sites)),
          names_(std::move(names)),
          spec_{1, 0},
          run_(net_, spec_, static_cast<int>(sites_.size())) {
        terms_.assign(names_.size(), 0.0);
        for (std::size_t i = 0; i < sites_.size(); ++i) {
            const int base = static_cast<int>(i) * spec_.comps();
            run_.input().col(base) = sites_[i].input;
            if (sites_[i].direction.size() > 0)
                run_.input().col(base + spec_.first_col(0)) = sites_[i].direction;
        }
        run_.set_active(static_cast<int>(sites_.size()));
    }

    std::vector<std::string> term_names() const override { return names_; }
    std::vector<double> term_values() const override { return terms_; }

    double value(const Eigen::VectorXd& theta) override { return eval(theta, nullptr); }
    double value_and_grad(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) override {
        grad.setZero(theta.size());
        return eval(theta, &grad);
    }

  private:
    double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
        net_.flat() = theta;
        std::fill(terms_.begin(), terms_.end(), 0.0);
        run_.forward();
        auto site_out = [&](std::size_t i) {
            const int p = static_cast<int>(i);
            return sites_[i].direction.size() > 0 ? run_.first(p, 0) : run_.value(p);
        };
        double loss = 0.0;
        std::vector<double> res(sites_.size(), 0.0);
        for (std::size_t i = 0; i < sites_.size(); ++i) {
            const auto& s = sites_[i];
            double r = s.scale * site_out(i) - s.target;
            if (s.pair_with >= 0) r += s.pair_scale * site_out(static_cast<std::size_t>(s.pair_with));
            res[i] = r;
            loss += s.weight * r * r;
            terms_[static_cast<std::size_t>(s.group)] += s.weight * r * r;
        }
        if (grad) {
            run_.seeds().setZero();
            auto seed = [&](std::size_t i, double w) {
                const int base = static_cast<int>(i) * spec_.comps();
                const int col = sites_[i].direction.size() > 0 ? base + spec_.first_col(0) : base;
                run_.seeds()(0, col) += w;
            };
            for (std::size_t i = 0; i < sites_.size(); ++i) {
                const auto& s = sites_[i];
                const double w = 2.0 * s.weight * res[i];
                if (w == 0.0) continue;
                seed(i, w * s.scale);
                if (s.pair_with >= 0) seed(static_cast<std::size_t>(s.pair_with), w * s.pair_scale);
            }
            run_.reverse(*grad);
        }
        return loss;
    }

    MlpParams net_;
    std::vector<Site> sites_;
    std::vector<std::string> names_;
    std::vector<double> terms_;
    LaneSpec spec_;
    LaneRun run_;
};

inline void require_finite_training(const TrainReport& rep, const char* what) {
    if (rep.status == "diverged")
        throw TrainingError(std::string(what) + ": training diverged", rep.iterations_run);
}

}  // namespace detail

/// Boundary-lift network: min w1g * mean |g(xB) - h0|^2
///                          + w2g * mean |g(xG,+1) - g(xG,-1) - g0|^2.
/// With a plain MLP (homogeneous jump data) the jump term is identically
/// zero and only the boundary term trains.
inline std::pair<MlpParams, TrainReport> train_g(
    MlpParams net, const std::vector<Vec2>& boundary, const std::vector<InterfaceSample>& interface,
    const std::function<double(const Vec2&)>& h0, const std::function<double(const Vec2&)>& g0,
    double w1g, double w2g, const LbfgsConfig& cfg) {
    HCPINN_REQUIRE(!boundary.empty(), PreconditionError, "train_g: boundary samples required");
    const bool dcsnn = net.input_dim() == 3;
    std::vector<detail::ValueGradObjective::Site> sites;
    for (const auto& x : boundary) {
        detail::ValueGradObjective::Site s;
        if (dcsnn)
            s.input = Eigen::Vector3d(x[0], x[1], 1.0);
        else
            s.input = Eigen::Vector2d(x[0], x[1]);
        s.target = h0(x);
        s.weight = w1g / static_cast<double>(boundary.size());
        s.group = 0;
        sites.push_back(std::move(s));
    }
    if (dcsnn) {
        HCPINN_REQUIRE(!interface.empty(), PreconditionError, "train_g: interface samples required");
        for (const auto& p : interface) {
            detail::ValueGradObjective::Site minus;  // referenced by the jump site below
            minus.input = Eigen::Vector3d(p.x[0], p.x[1], -1.0);
            minus.weight = 0.0;
            sites.push_back(std::move(minus));
            detail::ValueGradObjective::Site plus;
            plus.input = Eigen::Vector3d(p.x[0], p.x[1], 1.0);
            plus.target = g0(p.x);
            plus.weight = w2g / static_cast<double>(interface.size());
            plus.group = 1;
            plus.pair_with = static_cast<int>(sites.size()) - 1;
            sites.push_back(std::move(plus));
        }
    }
    detail::ValueGradObjective obj(net, std::move(sites), {"g_boundary", "g_jump"});
    Eigen::VectorXd theta = net.flat();
    TrainReport rep = lbfgs_run(obj, theta, cfg);
    detail::require_finite_training(rep, "train_g");
    net.flat() = theta;
    return {std::move(net), std::move(rep)};
}

/// Boundary-vanishing factor: min w2h * mean |h - hbar|^2 over the interior
/// plus w1h * mean |h(xB)|^2 on the boundary.
inline std::pair<MlpParams, TrainReport> train_h(MlpParams net,
                                                 const std::vector<LabeledPoint>& interior,
                                                 const std::vector<Vec2>& boundary,
                                                 const std::function<double(const Vec2&)>& hbar,
                                                 double w1h, double w2h, const LbfgsConfig& cfg) {
    HCPINN_REQUIRE(!interior.empty() && !boundary.empty(), PreconditionError,
                   "train_h: interior and boundary samples required");
    std::vector<detail::ValueGradObjective::Site> sites;
    for (const auto& x : boundary) {
        detail::ValueGradObjective::Site s;
        s.input = Eigen::Vector2d(x[0], x[1]);
        s.weight = w1h / static_cast<double>(boundary.size());
        s.group = 0;
        sites.push_back(std::move(s));
    }
    for (const auto& p : interior) {
        detail::ValueGradObjective::Site s;
        s.input = Eigen::Vector2d(p.x[0], p.x[1]);
        s.target = hbar(p.x);
        s.weight = w2h / static_cast<double>(interior.size());
        s.group = 1;
        sites.push_back(std::move(s));
    }
    detail::ValueGradObjective obj(net, std::move(sites), {"h_boundary", "h_interior"});
    Eigen::VectorXd theta = net.flat();
    TrainReport rep = lbfgs_run(obj, theta, cfg);
    detail::require_finite_training(rep, "train_h");
    net.flat() = theta;
    return {std::move(net), std::move(rep)};
}

/// How the interface auxiliary network is trained:
///   PerSide  - value jump to 0, outside normal derivative to gamma_plus,
///              inside normal derivative to gamma_minus (three terms);
///   FluxJump - value jump to 0 and the combined residual
///              |beta+ dn phi(+1) - beta- dn phi(-1) - gamma|^2.
enum class PhiLossKind { PerSide, FluxJump };

/// Interface auxiliary network (a DCSNN). The implied flux-jump target
/// beta+ * gamma_plus - beta- * gamma_minus (or gamma for FluxJump) must be
/// nonzero, otherwise phi cannot separate the two sides.
inline std::pair<MlpParams, TrainReport> train_phi(MlpParams net,
                                                   const std::vector<InterfaceSample>& interface,
                                                   const InterfaceGeometry& geom, PhiLossKind kind,
                                                   double gamma_plus, double gamma_minus, double w1,
                                                   double w2, const AdamConfig& cfg) {
    HCPINN_REQUIRE(!interface.empty(), PreconditionError, "train_phi: interface samples required");
    const double gamma = kind == PhiLossKind::PerSide
                             ? geom.beta_plus * gamma_plus - geom.beta_minus * gamma_minus
                             : gamma_plus;
    HCPINN_REQUIRE(gamma != 0.0, PreconditionError, "train_phi: target flux jump must be nonzero");
    HCPINN_REQUIRE(net.input_dim() == 3, ShapeError, "train_phi: expects a DCSNN (x1,x2,z)");
    std::vector<detail::ValueGradObjective::Site> sites;
    const double wjump = w1 / static_cast<double>(interface.size());
    const double wgrad = w2 / static_cast<double>(interface.size());
    for (const auto& p : interface) {
        detail::ValueGradObjective::Site minus;
        minus.input = Eigen::Vector3d(p.x[0], p.x[1], -1.0);
        minus.weight = 0.0;
        sites.push_back(minus);
        detail::ValueGradObjective::Site jump;
        jump.input = Eigen::Vector3d(p.x[0], p.x[1], 1.0);
        jump.weight = wjump;
        jump.group = 0;
        jump.pair_with = static_cast<int>(sites.size()) - 1;
        sites.push_back(std::move(jump));

        const Eigen::Vector3d dir(p.normal[0], p.normal[1], 0.0);
        if (kind == PhiLossKind::PerSide) {
            detail::ValueGradObjective::Site dplus;
            dplus.input = Eigen::Vector3d(p.x[0], p.x[1], 1.0);
            dplus.direction = dir;
            dplus.target = gamma_plus;
            dplus.weight = wgrad;
            dplus.group = 1;
            sites.push_back(std::move(dplus));
            detail::ValueGradObjective::Site dminus;
            dminus.input = Eigen::Vector3d(p.x[0], p.x[1], -1.0);
            dminus.direction = dir;
            dminus.target = gamma_minus;
            dminus.weight = wgrad;
            dminus.group = 2;
            sites.push_back(std::move(dminus));
        } else {
            detail::ValueGradObjective::Site dm;
            dm.input = Eigen::Vector3d(p.x[0], p.x[1], -1.0);
            dm.direction = dir;
            dm.weight = 0.0;
            sites.push_back(std::move(dm));
            detail::ValueGradObjective::Site flux;
            flux.input = Eigen::Vector3d(p.x[0], p.x[1], 1.0);
            flux.direction = dir;
            flux.target = gamma;
            flux.weight = wgrad;
            flux.group = 1;
            flux.scale = geom.beta_plus;
            flux.pair_with = static_cast<int>(sites.size()) - 1;
            flux.pair_scale = -geom.beta_minus;
            sites.push_back(std::move(flux));
        }
    }
    detail::ValueGradObjective obj(net, std::move(sites),
                                   {"phi_jump", "phi_grad_plus", "phi_grad_minus"});
    Eigen::VectorXd theta = net.flat();
    TrainReport rep = adam_run(obj, theta, cfg);
    detail::require_finite_training(rep, "train_phi");
    net.flat() = theta;
    return {std::move(net), std::move(rep)};
}

}  // namespace hcpinn
