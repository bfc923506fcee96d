#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "critreg/linalg.hpp"

#include <random>

using namespace critreg;
using doctest::Approx;

namespace {

SparseOperator path2() { return SparseOperator(2, {{0, 0, 1}, {0, 1, -1}, {1, 0, -1}, {1, 1, 1}}); }

void check_pair(const SparseOperator& K, const OracleResult& o) {
    const auto& g = *o.pair.psi.grid;
    const auto& psi = o.pair.psi.values;
    const auto& mass = g.mass();
    CHECK(weighted_norm(psi, mass) == Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(weighted_sum(psi, mass)) <= 1e-10);
    // Residual of K v = mu B v for the B-unit vector v = h psi.
    const auto Kpsi = K.apply(psi);
    double r = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) {
        const double d = g.spacing() * (Kpsi[k] - o.pair.mu * g.area_fraction(k) * psi[k]);
        r += d * d;
    }
    CHECK(std::sqrt(r) <= 1e-8 * K.norm_inf());
    const double rq = dirichlet_energy(g, psi) / inner(psi, psi, mass);
    CHECK(rq == Approx(o.pair.mu).epsilon(1e-10));
}

} // namespace

TEST_CASE("weighted inner products") {
    const std::vector<double> m{1, 2, 3}, a{1, 1, 1}, b{3, 0, -1};
    CHECK(inner(a, b, m) == Approx(0.0));
    CHECK(weighted_sum(b, m) == Approx(0.0));
    CHECK(weighted_norm(a, m) == Approx(std::sqrt(6.0)));
    std::vector<double> c{1, 2, 4};
    remove_weighted_mean(c, m);
    CHECK(weighted_sum(c, m) == Approx(0.0).epsilon(1e-14));
    std::vector<double> d{1, 2, 6};
    remove_mean(d);
    CHECK(d[0] == Approx(-2.0));
}

TEST_CASE("conjugate gradients") {
    SUBCASE("identity") {
        const SparseOperator I(4, {{0, 0, 1}, {1, 1, 1}, {2, 2, 1}, {3, 3, 1}});
        CgOptions opt;
        opt.deflate_constant = false;
        const std::vector<double> b{1, -2, 3.5, 7};
        const auto x = conjugate_gradient_solve(I, b, 0.0, opt).x;
        for (std::size_t i = 0; i < b.size(); ++i) CHECK(x[i] == Approx(b[i]));
    }
    SUBCASE("deflated path graph") {
        const auto x = conjugate_gradient_solve(path2(), std::vector<double>{1, -1}, 0.0).x;
        CHECK(x[0] == Approx(0.5));
        CHECK(x[1] == Approx(-0.5));
    }
    SUBCASE("square laplacian, random zero-mean right-hand side") {
        const auto g = build_grid(Shape::unit_square(), std::nullopt, 1.0 / 32);
        const auto A = assemble_neumann_laplacian(*g);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> nd;
        std::vector<double> b(g->active_count());
        for (auto& v : b) v = nd(rng);
        remove_mean(b);
        CgOptions opt;
        opt.tol = 1e-10;
        const auto res = conjugate_gradient_solve(A, b, 0.0, opt);
        const auto Ax = A.apply(res.x);
        double rn = 0, bn = 0;
        for (std::size_t i = 0; i < b.size(); ++i) rn += (Ax[i] - b[i]) * (Ax[i] - b[i]), bn += b[i] * b[i];
        CHECK(std::sqrt(rn / bn) <= 1e-10);
        CHECK(res.relative_residual <= 1e-10);
        opt.max_iter = 2;
        CHECK_THROWS_AS(conjugate_gradient_solve(A, b, 0.0, opt), SolverError);
    }
}

TEST_CASE("fix_sign") {
    CHECK(fix_sign(std::vector<double>{-3, 1}) == std::vector<double>{3, -1});
    CHECK(fix_sign(std::vector<double>{2, -1}) == std::vector<double>{2, -1});
    CHECK(fix_sign(std::vector<double>{-1, 1}) == std::vector<double>{1, -1});
}

TEST_CASE("second eigenpair oracle") {
    SUBCASE("two-cell path") {
        const auto g = build_grid(Shape::polygon({{0, 0}, {2, 0}, {2, 1}, {0, 1}}), std::nullopt, 1.0);
        const auto o = second_eigenpair_oracle(assemble_neumann_laplacian(*g), g);
        CHECK(o.pair.mu == Approx(2.0));
        CHECK(o.pair.psi.values[0] == Approx(1 / std::sqrt(2.0)));
        CHECK(o.pair.psi.values[1] == Approx(-1 / std::sqrt(2.0)));
    }
    SUBCASE("unit square: double eigenvalue") {
        const auto g = build_grid(Shape::unit_square(), std::nullopt, 1.0 / 64);
        const auto K = assemble_neumann_laplacian(*g);
        const auto o = second_eigenpair_oracle(K, g);
        CHECK(o.pair.mu == Approx(M_PI * M_PI).epsilon(0.005));
        CHECK(o.pair.degenerate);
        CHECK(o.cluster.size() == 2);
        check_pair(K, o);
        // cos(pi x) lies in the returned eigenspace.
        const auto c = GridField::sample(g, [](Vec2 p) { return std::cos(M_PI * p.x); });
        const auto a = align_in_cluster(o.cluster, c.values);
        CHECK(std::abs(inner(a.values, c.values, g->mass())) / weighted_norm(c.values, g->mass()) ==
              Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("unit disk") {
        const auto g = build_grid(Shape::disk({0, 0}, 1), std::nullopt, 1.0 / 64);
        const auto K = assemble_neumann_laplacian(*g);
        const auto o = second_eigenpair_oracle(K, g);
        CHECK(o.pair.mu == Approx(3.389872).epsilon(0.02));
        CHECK(o.pair.degenerate);
        check_pair(K, o);
    }
    SUBCASE("holed non-convex domain, both inner solvers agree") {
        const auto l = Shape::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
        const auto g = build_grid(l, Hole{{0.5, 0.5}, 0.2}, 0.04);
        const auto K = assemble_neumann_laplacian(*g);
        const auto direct = second_eigenpair_oracle(K, g);
        OracleOptions opt;
        opt.solver = InnerSolver::cg;
        const auto cg = second_eigenpair_oracle(K, g, opt);
        CHECK(direct.pair.mu == Approx(cg.pair.mu).epsilon(1e-10));
        CHECK_FALSE(direct.pair.degenerate);
        CHECK(direct.pair.gap() > 0.0);
        check_pair(K, direct);
    }
}
