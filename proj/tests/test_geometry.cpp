#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "hcpinn/geometry.hpp"

using namespace hcpinn;

namespace {

InterfaceGeometry circle_geom(double r0 = 0.5) {
    return {{-1, -1}, {1, 1}, Circle{r0}, 1.0, 10.0};
}

InterfaceGeometry star_geom() {
    return {{-1, -1}, {1, 1}, PolarStar{0.5, 0.2, 5}, 1.0, 10.0};
}

InterfaceGeometry box_geom() {
    return {{-2, -2}, {2, 2}, Box{{0, 0}, {1, 1}}, 1.0, 10.0};
}

}  // namespace

TEST_CASE("classify on the circle geometry") {
    const auto g = circle_geom();
    CHECK(classify(g, {0, 0}) == Region::Minus);
    CHECK(classify(g, {0.5, 0}) == Region::OnInterface);
    CHECK(classify(g, {0.8, 0.1}) == Region::Plus);
    CHECK(classify(g, {1.0, 0.3}) == Region::OnBoundary);
    CHECK_THROWS_AS(classify(g, {1.5, 0}), DomainError);
}

TEST_CASE("unit normals") {
    const auto g = circle_geom();
    CHECK((unit_normal(g, {0.5, 0}) - Vec2(1, 0)).norm() < 1e-14);
    CHECK((unit_normal(g, {0, -0.5}) - Vec2(0, -1)).norm() < 1e-14);
    CHECK_THROWS_AS(unit_normal(g, {0.2, 0.2}), PreconditionError);

    // Star interface at theta = 0: grad of r - a - b sin(k theta) is
    // (1, -2)/sqrt(5) after normalization.
    const auto s = star_geom();
    const Vec2 n = unit_normal(s, {0.5, 0});
    CHECK_THAT(n[0], Catch::Matchers::WithinAbs(0.4472135954999579, 1e-12));
    CHECK_THAT(n[1], Catch::Matchers::WithinAbs(-0.8944271909999159, 1e-12));
}

TEST_CASE("normals point from Minus into Plus for all supported interfaces") {
    const double eps = 1e-4;
    for (const auto& g : {circle_geom(), star_geom(), box_geom()}) {
        const auto samples = sample_interface(g, 120, 99);
        for (const auto& s : samples) {
            CHECK(classify(g, s.x + eps * s.normal) == Region::Plus);
            CHECK(classify(g, s.x - eps * s.normal) == Region::Minus);
        }
    }
}

TEST_CASE("Latin hypercube stratification and determinism") {
    auto pts = sample_lhs({0, 0}, {1, 1}, 4, 7);
    REQUIRE(pts.size() == 4);
    for (int axis = 0; axis < 2; ++axis) {
        std::set<int> strata;
        for (const auto& p : pts) {
            CHECK(p[axis] >= 0.0);
            CHECK(p[axis] < 1.0);
            strata.insert(static_cast<int>(p[axis] * 4));
        }
        CHECK(strata == std::set<int>{0, 1, 2, 3});
    }

    auto single = sample_lhs({-1, -1}, {1, 1}, 1, 3);
    REQUIRE(single.size() == 1);
    CHECK(std::abs(single[0][0]) <= 1.0);

    auto again = sample_lhs({0, 0}, {1, 1}, 4, 7);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK((pts[i] - again[i]).norm() == 0.0);

    // Stratification holds at larger counts too.
    auto many = sample_lhs({0, 0}, {1, 1}, 128, 11);
    for (int axis = 0; axis < 2; ++axis) {
        std::set<int> strata;
        for (const auto& p : many) strata.insert(static_cast<int>(p[axis] * 128));
        CHECK(strata.size() == 128);
    }
}

TEST_CASE("interface samples satisfy the interface equation") {
    const auto c = circle_geom();
    for (const auto& s : sample_interface(c, 64, 5)) {
        CHECK(std::abs(s.x.norm() - 0.5) <= 1e-10);
        CHECK(std::abs(s.normal.norm() - 1.0) <= 1e-12);
    }
    const auto st = star_geom();
    for (const auto& s : sample_interface(st, 64, 6)) {
        CHECK(std::abs(interface_residual(st, s.x)) <= 1e-10);
    }
    CHECK(sample_interface(c, 4, 1).size() == 4);

    // Box edges with equal lengths share samples equally.
    const auto b = box_geom();
    auto bs = sample_interface(b, 8, 2);
    int per_edge[4] = {0, 0, 0, 0};
    for (const auto& s : bs) {
        if (std::abs(s.x[1] - 0.0) <= 1e-12 && std::abs(s.normal[1] + 1) < 1e-12) per_edge[0]++;
        if (std::abs(s.x[0] - 1.0) <= 1e-12) per_edge[1]++;
        if (std::abs(s.x[1] - 1.0) <= 1e-12 && std::abs(s.normal[1] - 1) < 1e-12) per_edge[2]++;
        if (std::abs(s.x[0] - 0.0) <= 1e-12) per_edge[3]++;
    }
    for (int e = 0; e < 4; ++e) CHECK(per_edge[e] == 2);

    InterfaceGeometry ls{{-1, -1}, {1, 1}, LevelSet{[](const Vec2& x) { return x.norm() - 0.5; }, {}}, 1, 1};
    CHECK_THROWS_AS(sample_interface(ls, 4, 1), UnsupportedError);
}

TEST_CASE("Chebyshev time nodes") {
    auto one = sample_chebyshev_time(2.0, 1);
    REQUIRE(one.size() == 1);
    CHECK_THAT(one[0], Catch::Matchers::WithinAbs(1.0, 1e-15));

    auto two = sample_chebyshev_time(M_PI / 2.0, 2);
    REQUIRE(two.size() == 2);
    CHECK_THAT(two[0], Catch::Matchers::WithinAbs(0.2300377961276525, 1e-12));
    CHECK_THAT(two[1], Catch::Matchers::WithinAbs(1.340758530667244, 1e-12));

    auto many = sample_chebyshev_time(0.7, 16);
    for (std::size_t i = 0; i < many.size(); ++i) {
        CHECK(many[i] > 0.0);
        CHECK(many[i] < 0.7);
        if (i > 0) CHECK(many[i] > many[i - 1]);
    }
}

TEST_CASE("interior samples always carry an unambiguous side label") {
    for (const auto& g : {circle_geom(), star_geom(), box_geom()}) {
        const auto pts = sample_interior(g, 512, 21);
        REQUIRE(pts.size() == 512);
        int minus = 0;
        for (const auto& p : pts) {
            CHECK((p.region == Region::Minus || p.region == Region::Plus));
            CHECK(classify(g, p.x) == p.region);
            minus += p.region == Region::Minus;
        }
        CHECK(minus > 0);
        CHECK(minus < 512);
    }
}

TEST_CASE("boundary samples sit exactly on the boundary") {
    const auto g = circle_geom();
    for (const auto& x : sample_boundary(g, 100, 9)) {
        CHECK(on_outer_boundary(g, x));
        const bool exact = x[0] == -1.0 || x[0] == 1.0 || x[1] == -1.0 || x[1] == 1.0;
        CHECK(exact);
    }
}

TEST_CASE("sample set CSV export") {
    const auto g = circle_geom();
    SampleSet set;
    set.interior = sample_interior(g, 8, 1);
    set.boundary = sample_boundary(g, 4, 2);
    set.interface_pts = sample_interface(g, 4, 3);
    set.to_csv("/tmp/hcpinn_samples.csv");
    std::ifstream in("/tmp/hcpinn_samples.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2,label");
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    CHECK(lines == 16);
}
