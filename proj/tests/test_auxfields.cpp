#include <catch2/catch_amalgamated.hpp>

#include "hcpinn/auxfields.hpp"
#include "hcpinn/problems.hpp"
#include "testing_util.hpp"

using namespace hcpinn;

namespace {

InterfaceGeometry circle_geom(double bp = 10.0) {
    return {{-1, -1}, {1, 1}, Circle{0.5}, 1.0, bp};
}

AuxiliaryField example1_aux() { return build_example("1").option1_aux(); }

}  // namespace

TEST_CASE("phi_circle values and continuity") {
    const AuxScalar phi = phi_circle(0.5);
    CHECK_THAT(phi.value({0.25, 0}, Region::Minus), Catch::Matchers::WithinAbs(0.25, 1e-15));
    CHECK(phi.value({0.8, 0.1}, Region::Plus) == 1.0);
    const double jump = phi.value({0.5, 0}, Region::Plus) - phi.value({0.5, 0}, Region::Minus);
    CHECK(std::abs(jump) < 1e-14);
    CHECK_THROWS_AS(phi_circle(0.0), PreconditionError);
}

TEST_CASE("phi_box values") {
    const AuxScalar phi = phi_box({0, 0}, {1, 1});
    CHECK_THAT(phi.value({0.5, 0.5}, Region::Minus), Catch::Matchers::WithinAbs(0.0625, 1e-15));
    CHECK(phi.value({1.5, 0.5}, Region::Plus) == 0.0);
    CHECK(phi.value({0.0, 0.5}, Region::Plus) == 0.0);  // on Gamma, outside branch
}

TEST_CASE("theorem-3.2 star construction reproduces the printed values") {
    const AuxiliaryField aux = build_example("2").option1_aux();
    // phi = 1 - 20 * phi0 with c = 0.2.
    CHECK_THAT(aux.phi.value({0, 0}, Region::Minus), Catch::Matchers::WithinAbs(0.84, 1e-12));
    CHECK_THAT(aux.phi.value({0.4, 0}, Region::Minus), Catch::Matchers::WithinAbs(0.86, 1e-12));
    CHECK_THAT(aux.phi.value({0.5, 0}, Region::Minus), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(aux.phi.value({0.5, 0}, Region::Plus) == 1.0);
}

TEST_CASE("theorem-3.2 spec validation") {
    Theorem32Spec bad;
    bad.psi_list.push_back([](const Vec2& x) { return CJet::constant(x.norm(), 2); });
    bad.c_list = {0.2};
    bad.c = 0.25;  // violates c < prod(c_i)
    CHECK_THROWS_AS(phi_theorem32(bad), PreconditionError);
}

namespace {

/// Circle interface realized through the generic construction, to check the
/// theorem path against the auxiliary-field invariants.
AuxiliaryField circle_via_theorem32() {
    Theorem32Spec t32;
    t32.psi_list.push_back([](const Vec2& x) {
        CJet x1 = CJet::variable(x[0], 0, 2), x2 = CJet::variable(x[1], 1, 2);
        return 0.25 - x1 * x1 - x2 * x2;
    });
    t32.in_U = {};  // psi is C^2 everywhere
    t32.c_list = {0.2};
    t32.c = 0.1;
    AuxiliaryField aux;
    aux.g = AuxScalar::closed_form([](const Vec2&, Region) { return CJet::constant(0.0, 2); });
    aux.h = AuxScalar::closed_form([](const Vec2& x, Region) {
        CJet x1 = CJet::variable(x[0], 0, 2), x2 = CJet::variable(x[1], 1, 2);
        return (x1 * x1 - 1.0) * (x2 * x2 - 1.0);
    });
    aux.phi = phi_theorem32(t32);
    aux.tol_hard = kTolHardClosedForm;
    return aux;
}

AuxiliaryField box_aux() {
    AuxiliaryField aux;
    aux.g = AuxScalar::closed_form([](const Vec2&, Region) { return CJet::constant(0.0, 2); });
    aux.h = AuxScalar::closed_form([](const Vec2& x, Region) {
        CJet x1 = CJet::variable(x[0], 0, 2), x2 = CJet::variable(x[1], 1, 2);
        return (x1 * x1 - 4.0) * (x2 * x2 - 4.0);
    });
    aux.phi = phi_box({0, 0}, {1, 1});
    aux.degenerate_on_interface = [](const Vec2& x) {
        auto near_int = [](double v) { return std::abs(v - 0.0) < 0.05 || std::abs(v - 1.0) < 0.05; };
        return near_int(x[0]) && near_int(x[1]);  // corner neighborhoods
    };
    aux.tol_hard = kTolHardClosedForm;
    return aux;
}

}  // namespace

TEST_CASE("auxiliary-field invariants hold on 1000+ fresh samples") {
    struct Case {
        AuxiliaryField aux;
        InterfaceGeometry geom;
    };
    const std::vector<Case> cases = {
        {circle_via_theorem32(), circle_geom()},
        {box_aux(), {{-2, -2}, {2, 2}, Box{{0, 0}, {1, 1}}, 1.0, 10.0}},
        {build_example("2").option1_aux(), build_example("2").geometry},
        {example1_aux(), circle_geom()},
    };
    for (const auto& c : cases) {
        const AuxReport rep = verify_aux(c.aux, c.geom, 1000, 2024);
        INFO(rep.summary());
        CHECK(rep.pass);
    }
}

TEST_CASE("Example-1 analytic triple verifies to machine precision") {
    const auto aux = example1_aux();
    const auto geom = circle_geom();
    const AuxReport rep = verify_aux(aux, geom, 2000, 7);
    CHECK(rep.max_g_boundary_residual <= 1e-12);
    CHECK(rep.max_g_jump_residual <= 1e-12);
    CHECK(rep.max_h_boundary == 0.0);  // exact factorized zero
    CHECK(rep.min_h_interior > 0.0);
    CHECK(rep.max_phi_jump <= 1e-12);
    // [beta dn phi] = |beta+ * 0 - beta- * 8 r0| = 4.
    CHECK_THAT(rep.min_phi_flux_jump, Catch::Matchers::WithinAbs(4.0, 1e-10));

    // g equals h0 identically on the boundary (1e4 points).
    double worst = 0.0;
    for (const auto& x : sample_boundary(geom, 10000, 31)) {
        worst = std::max(worst, std::abs(aux.g.value(x, Region::Plus) - aux.h0(x)));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("box phi flux jump is positive away from corners") {
    const auto aux = box_aux();
    const InterfaceGeometry geom{{-2, -2}, {2, 2}, Box{{0, 0}, {1, 1}}, 1.0, 10.0};
    for (const auto& s : sample_interface(geom, 400, 11)) {
        if (aux.degenerate_on_interface(s.x)) continue;
        CHECK(std::abs(aux.phi_flux_jump(geom, s.x, s.normal)) > 1e-3);
    }
}

TEST_CASE("closed-form aux jets match finite differences") {
    const auto problem = build_example("2");
    const auto aux = problem.option1_aux();
    Rng rng(5);
    int checked = 0;
    while (checked < 40) {
        const Vec2 x(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9));
        const Region side = classify(problem.geometry, x);
        if (side != Region::Minus && side != Region::Plus) continue;
        // Stay clear of Gamma and the clamp boundary so the FD stencil stays
        // within one smooth branch.
        if (std::abs(interface_residual(problem.geometry, x)) < 5e-3) continue;
        const double psi_from_clamp = 0.5 + 0.2 * std::sin(5.0 * std::atan2(x[1], x[0])) - x.norm();
        if (std::abs(psi_from_clamp - 0.2) < 5e-3) continue;
        const Jet2 j = aux.phi.jet(x, side);
        auto f = [&](const Eigen::VectorXd& q) { return aux.phi.value(Vec2(q(0), q(1)), side); };
        Eigen::VectorXd xv(2);
        xv << x[0], x[1];
        CHECK(testing::rel_err(j.grad, testing::fd_grad(f, xv, 1e-6)) < 1e-5);
        ++checked;
    }
}

TEST_CASE("continuity across the clamp boundary of the theorem construction") {
    // Walk radial lines for the star field; the clamp boundary sits where
    // psi == c, i.e. r = 0.3 + 0.2 sin(5 theta).
    const auto aux = build_example("2").option1_aux();
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        const double rc = 0.3 + 0.2 * std::sin(5.0 * theta);
        const Vec2 dir(std::cos(theta), std::sin(theta));
        const double eps = 1e-6;
        const Vec2 inner = (rc - eps) * dir, outer = (rc + eps) * dir;
        CHECK(std::abs(aux.phi.value(outer, Region::Minus) - aux.phi.value(inner, Region::Minus)) <= 1e-8);
        // One-sided finite-difference radial slopes on each side.
        auto slope = [&](double r) {
            const double h = 1e-5;
            return (aux.phi.value((r + h) * dir, Region::Minus) -
                    aux.phi.value((r - h) * dir, Region::Minus)) /
                   (2.0 * h);
        };
        CHECK(std::abs(slope(rc - 2e-4) - slope(rc + 2e-4)) <= 1e-4 + 3e-3 * std::abs(slope(rc)));
    }
}

// ---------------------------------------------------------------------------
// Pretraining (Option II recipes)
// ---------------------------------------------------------------------------

TEST_CASE("train_g reaches the boundary data and decreases monotonically") {
    const auto geom = circle_geom();
    const auto problem = build_example("1");
    auto h0 = [&](const Vec2& x) { return problem.h0(x, 0.0); };
    const auto boundary = sample_boundary(geom, 256, 1001);

    Rng rng(42);
    MlpParams net = MlpParams::init({2, 500, 1}, rng);
    LbfgsConfig cfg;
    cfg.iterations = 200;
    cfg.record_wolfe = true;
    auto [trained, rep] =
        train_g(net, boundary, {}, h0, [](const Vec2&) { return 0.0; }, 1.0, 1.0, cfg);

    double mse = 0.0;
    for (const auto& x : sample_boundary(geom, 512, 77)) {
        const double r = mlp_eval(trained, Eigen::Vector2d(x[0], x[1])) - h0(x);
        mse += r * r;
    }
    mse /= 512.0;
    CHECK(mse <= 1e-8);
    for (std::size_t i = 1; i < rep.loss_history.size(); ++i)
        CHECK(rep.loss_history[i] <= rep.loss_history[i - 1] + 1e-15);

    // Zero-data, zero-output-layer network: loss 0 from the start.
    MlpParams zero = MlpParams::zeros({2, 8, 1});
    LbfgsConfig mini;
    mini.iterations = 1;
    auto [znet, zrep] = train_g(zero, boundary, {}, [](const Vec2&) { return 0.0; },
                                [](const Vec2&) { return 0.0; }, 1.0, 1.0, mini);
    (void)znet;
    if (!zrep.loss_history.empty()) CHECK(zrep.loss_history.back() == 0.0);
}

TEST_CASE("train_h learns a boundary-vanishing interior-nonzero factor") {
    const auto geom = circle_geom();
    auto hbar = [](const Vec2& x) {
        return std::cos(0.5 * M_PI * x[0]) * std::cos(0.5 * M_PI * x[1]);
    };
    const auto interior = sample_interior(geom, 1024, 3001);
    const auto boundary = sample_boundary(geom, 256, 3002);

    Rng rng(9);
    MlpParams net = MlpParams::init({2, 500, 1}, rng);
    LbfgsConfig cfg;
    cfg.iterations = 200;
    auto [trained, rep] = train_h(net, interior, boundary, hbar, 1.0, 0.01, cfg);
    (void)rep;

    double max_boundary = 0.0;
    for (const auto& x : sample_boundary(geom, 512, 5)) {
        max_boundary = std::max(max_boundary, std::abs(mlp_eval(trained, Eigen::Vector2d(x[0], x[1]))));
    }
    CHECK(max_boundary <= 1e-3);
    double min_interior = 1e30;
    for (const auto& p : sample_interior(geom, 512, 6)) {
        min_interior =
            std::min(min_interior, std::abs(mlp_eval(trained, Eigen::Vector2d(p.x[0], p.x[1]))));
    }
    CHECK(min_interior > 1e-3);

    // hbar itself is feasible: it vanishes on the boundary by its cosine
    // factors, so both loss terms would be zero under substitution.
    for (const auto& x : boundary) CHECK(std::abs(hbar(x)) < 1e-15);
}

TEST_CASE("train_phi: degenerate target rejected, trained field passes thresholds") {
    const auto geom = circle_geom();
    const auto interface = sample_interface(geom, 256, 4001);

    Rng rng(21);
    MlpParams net = MlpParams::init({3, 200, 1}, rng);
    AdamConfig cfg;
    cfg.iterations = 30000;
    cfg.schedule = {{0, 5e-4}, {7500, 2.924e-4}, {15000, 1.71e-4}, {22500, 1e-4}};

    CHECK_THROWS_AS(train_phi(net, interface, geom, PhiLossKind::PerSide, 0.0, 0.0, 1.0, 1.0, cfg),
                    PreconditionError);

    auto [trained, rep] =
        train_phi(net, interface, geom, PhiLossKind::PerSide, 5.0, 0.0, 1.0, 1.0, cfg);
    (void)rep;
    AuxScalar phi = AuxScalar::network_dcsnn(trained);
    double max_jump = 0.0, min_flux = 1e30;
    for (const auto& s : sample_interface(geom, 512, 4002)) {
        max_jump = std::max(max_jump,
                            std::abs(phi.value(s.x, Region::Plus) - phi.value(s.x, Region::Minus)));
        const Jet2 jp = phi.jet(s.x, Region::Plus), jm = phi.jet(s.x, Region::Minus);
        min_flux = std::min(min_flux, std::abs(geom.beta_plus * s.normal.dot(jp.grad) -
                                               geom.beta_minus * s.normal.dot(jm.grad)));
    }
    CHECK(max_jump <= 1e-3);
    CHECK(min_flux >= 1.0);
}
