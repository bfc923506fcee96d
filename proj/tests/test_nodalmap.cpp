#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "critreg/nodalmap.hpp"

#include <cmath>
#include <sstream>

using namespace critreg;
using doctest::Approx;

namespace {

EigenPair analytic_square(double h) {
    const auto g = build_grid(Shape::unit_square(), std::nullopt, h);
    EigenPair p;
    p.mu = M_PI * M_PI;
    p.psi = GridField::sample(g, [](Vec2 q) { return std::sqrt(2.0) * std::cos(M_PI * q.x); });
    return p;
}

EigenPair oracle_pair(const Shape& shape, double h) {
    const auto g = build_grid(shape, std::nullopt, h);
    return x_aligned_branch(second_eigenpair_oracle(assemble_neumann_laplacian(*g), g));
}

double value_near(const GridField& f, Vec2 p) {
    const auto& g = *f.grid;
    double best = 1e300, v = 0;
    for (std::size_t k = 0; k < g.active_count(); ++k) {
        const double d = norm(g.cell(k).position - p);
        if (d < best) {
            best = d;
            v = f.values[k];
        }
    }
    return v;
}

} // namespace

TEST_CASE("objective for the analytic square mode") {
    // f = 2 pi^2 cos(2 pi x)
    const double h = 1.0 / 64;
    const auto obj = small_hole_objective(analytic_square(h));
    const double peak = 2 * M_PI * M_PI;
    CHECK(value_near(obj.f, {0.5, 0.5}) == Approx(-peak * std::cos(M_PI * h)).epsilon(2e-3));
    CHECK(value_near(obj.f, {0.5, 0.2}) == Approx(-peak * std::cos(M_PI * h)).epsilon(2e-3));
    const auto& g = *obj.f.grid;
    for (std::size_t k = 0; k < g.active_count(); ++k) {
        if (obj.boundary_adjacent[k]) continue;
        const double x = g.cell(k).position.x;
        CHECK(obj.f.values[k] == Approx(peak * std::cos(2 * M_PI * x)).epsilon(5e-3).scale(peak));
    }
    // Cells next to the wall are flagged, the interior is not.
    std::size_t flagged = 0;
    for (std::size_t k = 0; k < g.active_count(); ++k) flagged += obj.boundary_adjacent[k];
    CHECK(flagged == 4 * 64 - 4);
}

TEST_CASE("sign invariance") {
    auto p = analytic_square(1.0 / 32);
    const auto a = small_hole_objective(p);
    for (auto& v : p.psi.values) v = -v;
    const auto b = small_hole_objective(p);
    CHECK(a.f.values == b.f.values);
    CHECK(a.boundary_adjacent == b.boundary_adjacent);
}

TEST_CASE("nodal set") {
    SUBCASE("square") {
        const double h = 1.0 / 32;
        const auto p = oracle_pair(Shape::unit_square(), h);
        const auto n = extract_nodal_set(p.psi);
        CHECK(n.sign_regions == 2);
        REQUIRE_FALSE(n.polylines.empty());
        for (const auto& line : n.polylines)
            for (const auto& q : line) CHECK(std::abs(q.x - 0.5) <= h);
        CHECK(n.distance({0.5, 0.3}) <= h);
        CHECK(n.distance({0.1, 0.3}) == Approx(0.4).epsilon(0.05));
    }
    SUBCASE("disk") {
        const double h = 0.03;
        const auto p = oracle_pair(Shape::disk({0, 0}, 1.0), h);
        CHECK(p.degenerate);
        const auto n = extract_nodal_set(p.psi);
        CHECK(n.sign_regions == 2);
        for (const auto& line : n.polylines)
            for (const auto& q : line) CHECK(std::abs(q.x) <= 2 * h);
    }
    SUBCASE("sign flip gives the same set") {
        auto p = analytic_square(1.0 / 16);
        const auto a = extract_nodal_set(p.psi);
        for (auto& v : p.psi.values) v = -v;
        const auto b = extract_nodal_set(p.psi);
        REQUIRE(a.crossings.size() == b.crossings.size());
        for (std::size_t k = 0; k < a.crossings.size(); ++k) CHECK(norm(a.crossings[k] - b.crossings[k]) < 1e-14);
        CHECK(a.sign_regions == b.sign_regions);
    }
    SUBCASE("no sign change") {
        const auto g = build_grid(Shape::unit_square(), std::nullopt, 0.1);
        CHECK_THROWS_AS(extract_nodal_set(GridField::sample(g, [](Vec2) { return 1.0; })), InvalidInput);
    }
}

TEST_CASE("minima of f lie on the nodal set") {
    SUBCASE("square") {
        const double h = 1.0 / 32;
        const auto r = nodal_report(oracle_pair(Shape::unit_square(), h));
        REQUIRE_FALSE(r.minima.empty());
        for (const auto& m : r.minima) {
            CHECK(m.distance_to_nodal <= 2 * h);
            CHECK(m.f == Approx(-2 * M_PI * M_PI).epsilon(0.01));
        }
    }
    SUBCASE("disk") {
        const double h = 0.03;
        const auto r = nodal_report(oracle_pair(Shape::disk({0, 0}, 1.0), h));
        REQUIRE_FALSE(r.minima.empty());
        for (const auto& m : r.minima) {
            CHECK(m.distance_to_nodal <= 3 * h);
            CHECK(norm(m.x) <= 3 * h);
        }
    }
    SUBCASE("a constant shift keeps the argmin set") {
        const double h = 1.0 / 32;
        auto r = nodal_report(oracle_pair(Shape::unit_square(), h));
        auto shifted = r.objective;
        for (auto& v : shifted.f.values) v += 0.25;
        const auto m = locate_f_minima(shifted, r.nodal);
        REQUIRE(m.size() == r.minima.size());
        for (std::size_t k = 0; k < m.size(); ++k) CHECK(m[k].x == r.minima[k].x);
    }
}

TEST_CASE("csv writers") {
    const auto r = nodal_report(analytic_square(1.0 / 16));
    std::ostringstream a, b, c;
    write_objective_csv(a, r.objective);
    write_nodal_csv(b, r.nodal);
    write_minima_csv(c, r.minima);
    CHECK(a.str().rfind("x,y,f,boundary_adjacent\n", 0) == 0);
    CHECK(b.str().rfind("polyline,x,y\n", 0) == 0);
    CHECK(c.str().rfind("x,y,f,distance_to_nodal\n", 0) == 0);
}
