#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "critreg/holeflow.hpp"

#include <sstream>

using namespace critreg;
using doctest::Approx;

namespace {

const Shape unit_disk = Shape::disk({0, 0}, 1.0);

} // namespace

TEST_CASE("boundary integrals of polynomial fields") {
    const Hole hole{{0.5, 0.4}, 0.1};
    const double r = hole.radius, cx = hole.center.x, cy = hole.center.y;
    const auto g = build_grid(Shape::unit_square(), hole, 1.0 / 64);

    const auto c = boundary_integrals(GridField::sample(g, [](Vec2) { return 2.5; }), hole, 64, 1.5);
    CHECK(norm(c.value_sq) < 1e-12);
    CHECK(norm(c.grad_sq) < 1e-12);
    CHECK(c.sum_sq == Approx(6.25 * 2 * M_PI * r));

    // Closed forms on a circle of radius r centred at c: for psi = x,
    // int |grad|^2 n = 0, int x^2 n = (2 pi c_x r^2, 0), int x n = (pi r^2, 0).
    const auto x = boundary_integrals(GridField::sample(g, [](Vec2 p) { return p.x; }), hole, 64, 1.5);
    CHECK(norm(x.grad_sq) < 1e-10);
    CHECK(x.value_sq.x == Approx(2 * M_PI * cx * r * r).epsilon(1e-10));
    CHECK(std::abs(x.value_sq.y) < 1e-12);
    CHECK(x.value.x == Approx(M_PI * r * r).epsilon(1e-10));
    CHECK(std::abs(x.value.y) < 1e-12);
    CHECK(x.sum_sq == Approx(2 * M_PI * r * cx * cx + M_PI * r * r * r).epsilon(1e-10));
    CHECK(x.sum == Approx(2 * M_PI * r * cx).epsilon(1e-10));

    const auto y = boundary_integrals(GridField::sample(g, [](Vec2 p) { return p.y; }), hole, 48, 2.0);
    CHECK(y.value_sq.y == Approx(2 * M_PI * cy * r * r).epsilon(1e-10));
    CHECK(norm(y.grad_sq) < 1e-10);
}

TEST_CASE("hole velocity") {
    const AdmissibleSet adm(unit_disk, 0.1);
    const double area = M_PI - M_PI * 0.01;

    const auto rest = hole_velocity(BoundaryIntegrals{}, 3.0, adm, {0.2, 0.1}, area);
    CHECK(norm(rest.v) == 0.0);
    CHECK(rest.a == 0.0);
    CHECK(rest.b == 0.0);

    BoundaryIntegrals in;
    in.grad_sq = {1, 0};
    const auto interior = hole_velocity(in, 3.0, adm, {0.0, 0.0}, area);
    CHECK(interior.v == Vec2{1, 0});
    CHECK_FALSE(interior.on_boundary);

    in.grad_sq = {1, 1};
    const auto edge = hole_velocity(in, 3.0, adm, {0.9, 0.0}, area);
    CHECK(edge.on_boundary);
    CHECK(edge.v.x == Approx(0.0));
    CHECK(edge.v.y == Approx(1.0));
    CHECK(edge.v_int == Vec2{1, 1});

    in.grad_sq = {-1, 1}; // points inward: left alone
    CHECK(hole_velocity(in, 3.0, adm, {0.9, 0.0}, area).v == Vec2{-1, 1});

    BoundaryIntegrals w;
    w.grad_sq = {0.4, 0.0};
    w.value_sq = {0.1, 0.2};
    w.value = {0.3, -0.1};
    const auto v = hole_velocity(w, 2.0, adm, {0.1, 0.1}, area);
    CHECK(v.v.x == Approx(0.4 - 2.0 * 0.1));
    CHECK(v.v.y == Approx(-2.0 * 0.2));
    CHECK(v.a == Approx(0.5 * dot(v.v, w.value_sq)));
    CHECK(v.b == Approx(dot(v.v, w.value) / area));
    CHECK(mu2_gradient(w, 2.0) == -1.0 * v.v_int);
}

TEST_CASE("symmetric configuration is critical") {
    const Hole hole{{0, 0}, 0.1};
    const auto g = build_grid(unit_disk, hole, 0.02);
    const auto o = second_eigenpair_oracle(assemble_neumann_laplacian(*g), g);
    CHECK(o.pair.degenerate);
    const auto I = boundary_integrals(o.pair.psi, hole, 64, 1.5);
    CHECK(norm(mu2_gradient(I, o.pair.mu)) < 1e-5);
}

TEST_CASE("shape gradient against finite differences") {
    const double h = 0.02, r = 0.1;
    for (const Vec2 x : {Vec2{0.3, 0.2}, Vec2{-0.1, -0.5}}) {
        const auto g = build_grid(unit_disk, Hole{x, r}, h);
        const auto o = second_eigenpair_oracle(assemble_neumann_laplacian(*g), g);
        const auto grad = mu2_gradient(boundary_integrals(o.pair.psi, Hole{x, r}, 64, 1.5), o.pair.mu);
        const double s = 2 * h;
        const auto sw = mu2_vs_position_sweep(unit_disk, r, h, {x + Vec2{s, 0}, x - Vec2{s, 0}, x + Vec2{0, s}, x - Vec2{0, s}}, 1);
        const Vec2 fd{(sw[0].mu2 - sw[1].mu2) / (2 * s), (sw[2].mu2 - sw[3].mu2) / (2 * s)};
        CHECK(norm(grad - fd) <= std::max(0.15 * norm(fd), 1e-3));
    }
}

TEST_CASE("field transfer between residual domains") {
    const auto a = build_grid(unit_disk, Hole{{0.2, 0}, 0.1}, 0.02);
    const auto b = build_grid(unit_disk, Hole{{0.25, 0.02}, 0.1}, 0.02);
    const auto psi = project_to_constraints(GridField::sample(a, [](Vec2 p) { return p.x; }));
    const auto t = transfer_field(psi, b);
    CHECK(t.grid == b);
    CHECK(weighted_norm(t.values, b->mass()) == Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(weighted_sum(t.values, b->mass())) < 1e-12);
    const auto other = build_grid(unit_disk, Hole{{0.2, 0}, 0.1}, 0.025);
    CHECK_THROWS_AS(transfer_field(psi, other), InvalidInput);
}

TEST_CASE("configuration validation") {
    HoleFlowConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.quadrature = 16;
    try {
        cfg.validate();
        FAIL("expected a quadrature error");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).rfind("quadrature", 0) == 0);
    }
    cfg = {};
    cfg.gradient_offset = 4.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = {};
    cfg.h = 0.04;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    CHECK_THROWS_AS(run_hole_flow(unit_disk, {0.95, 0}, HoleFlowConfig{}), InvalidInput);
}

TEST_CASE("hole flow") {
    SUBCASE("already at the critical point") {
        const auto t = run_hole_flow(unit_disk, {0, 0}, HoleFlowConfig{});
        CHECK(t.converged);
        CHECK(t.records.size() == 1);
        CHECK(t.records[0].degenerate);
    }
    SUBCASE("invariants along a coarse run") {
        HoleFlowConfig cfg;
        cfg.r = 0.15;
        cfg.h = 0.04;
        cfg.max_outer = 12;
        const auto t = run_hole_flow(unit_disk, {0.3, 0.4}, cfg);
        REQUIRE(t.records.size() > 2);
        const AdmissibleSet adm(unit_disk, cfg.r);
        for (std::size_t k = 0; k < t.records.size(); ++k) {
            const auto& r = t.records[k];
            CHECK(std::abs(r.norm_drift) <= 1e-10);
            CHECK(std::abs(r.mean_drift) <= 1e-10);
            CHECK(adm.contains(r.x));
            CHECK(r.mu2 > 0.0);
            if (k > 0) CHECK(r.mu2 <= t.records[k - 1].mu2 + 1e-3 * r.mu2);
        }
        CHECK(norm(t.records.back().x) < norm(t.records.front().x));
        std::ostringstream os;
        t.write_csv(os);
        CHECK(os.str().rfind("step,t,x,y,mu2,v_norm,on_boundary,degenerate\n", 0) == 0);
    }
    SUBCASE("start near the wall stays admissible") {
        HoleFlowConfig cfg;
        cfg.r = 0.15;
        cfg.h = 0.04;
        cfg.max_outer = 3;
        const auto t = run_hole_flow(unit_disk, {0.0, -0.75}, cfg);
        for (const auto& r : t.records) CHECK(unit_disk.signed_distance(r.x) < -cfg.r);
    }
    SUBCASE("perturbations of the minimiser return") {
        HoleFlowConfig cfg;
        cfg.r = 0.15;
        cfg.h = 0.04;
        // The sweep-oracle Hessian at the centre is positive definite.
        const double s = 0.08;
        const auto sw = mu2_vs_position_sweep(unit_disk, cfg.r, cfg.h, {{0, 0}, {s, 0}, {-s, 0}, {0, s}, {0, -s}}, 1);
        CHECK(sw[1].mu2 + sw[2].mu2 - 2 * sw[0].mu2 > 0.0);
        CHECK(sw[3].mu2 + sw[4].mu2 - 2 * sw[0].mu2 > 0.0);
        for (const Vec2 d : {Vec2{0.05, 0}, Vec2{-0.05, 0}, Vec2{0, 0.05}, Vec2{0, -0.05}}) {
            // On this coarse lattice the speed can stall just above v_tol within a cell of the centre.
            cfg.max_outer = 40;
            const auto t = run_hole_flow(unit_disk, d, cfg);
            CHECK(norm(t.records.back().x) <= 0.05);
            CHECK(norm(t.records.back().x) < norm(d));
        }
    }
}

TEST_CASE("position sweep") {
    SUBCASE("rise on the disk") {
        std::vector<Vec2> pos;
        for (int k = 0; k <= 8; ++k) pos.push_back({0.1 * k, 0});
        pos.push_back({0.85, 0});
        pos.push_back({0.88, 0});
        const auto sw = mu2_vs_position_sweep(unit_disk, 0.1, 1.0 / 64, pos, 2);
        for (int k = 1; k <= 8; ++k) CHECK(sw[k].mu2 > sw[k - 1].mu2);
        CHECK(sw[10].mu2 < sw[9].mu2);
        for (std::size_t k = 0; k < pos.size(); ++k) CHECK(sw[k].x == pos[k]);
    }
    SUBCASE("square: centre below a corner-adjacent position") {
        const auto sw = mu2_vs_position_sweep(Shape::unit_square(), 0.1, 1.0 / 64, {{0.5, 0.5}, {0.12, 0.12}}, 1);
        CHECK(sw[0].mu2 <= sw[1].mu2);
    }
    SUBCASE("errors are recorded per position") {
        const auto sw = mu2_vs_position_sweep(unit_disk, 0.1, 0.02, {{0.2, 0}, {0.95, 0}, {-0.2, 0}}, 3);
        CHECK(sw[0].error.empty());
        CHECK_FALSE(sw[1].error.empty());
        CHECK(std::isnan(sw[1].mu2));
        CHECK(sw[2].error.empty());
        CHECK(sw[0].mu2 == Approx(sw[2].mu2).epsilon(1e-9));
        std::ostringstream os;
        write_sweep_csv(os, sw);
        CHECK(os.str().rfind("x,y,mu2,gap\n", 0) == 0);
    }
}
