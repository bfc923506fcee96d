#include "critreg/graphlab.hpp"

#include "critreg/discretize.hpp"
#include "critreg/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>

namespace critreg {

namespace {

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

constexpr double degeneracy_tol = 1e-8;

} // namespace

SimpleGraph SimpleGraph::from_edges(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges) {
    for (auto& [i, j] : edges) {
        if (i >= n || j >= n) throw InvalidInput("edge (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
        if (i == j) throw InvalidInput("self-loop at node " + std::to_string(i));
        if (i > j) std::swap(i, j);
    }
    std::sort(edges.begin(), edges.end());
    if (auto it = std::adjacent_find(edges.begin(), edges.end()); it != edges.end())
        throw InvalidInput("duplicate edge (" + std::to_string(it->first) + "," + std::to_string(it->second) + ")");
    SimpleGraph g;
    g.n = n;
    g.edges = std::move(edges);
    return g;
}

std::vector<std::vector<std::size_t>> SimpleGraph::adjacency() const {
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    return adj;
}

SimpleGraph SimpleGraph::without(std::size_t node) const {
    if (node >= n) throw InvalidInput("node " + std::to_string(node) + " out of range");
    auto relabel = [node](std::size_t v) { return v > node ? v - 1 : v; };
    std::vector<std::pair<std::size_t, std::size_t>> kept;
    for (auto [i, j] : edges)
        if (i != node && j != node) kept.emplace_back(relabel(i), relabel(j));
    SimpleGraph g = from_edges(n - 1, std::move(kept));
    if (positions) {
        g.positions = *positions;
        g.positions->erase(g.positions->begin() + static_cast<std::ptrdiff_t>(node));
    }
    g.seed = seed;
    return g;
}

bool is_connected(const SimpleGraph& g) {
    if (g.n == 0) return false;
    const auto adj = g.adjacency();
    std::vector<bool> seen(g.n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto w : adj[v])
            if (!seen[w]) {
                seen[w] = true;
                ++count;
                stack.push_back(w);
            }
    }
    return count == g.n;
}

SimpleGraph generate_graph(const GraphModel& model, std::size_t n, std::uint64_t seed) {
    if (n < 3) throw InvalidInput("n: need at least 3 nodes");
    const double par = model.parameter;
    if (model.kind == GraphModel::Kind::erdos_renyi && !(par > 0.0 && par <= 1.0))
        throw InvalidInput("p: edge probability must lie in (0, 1]");
    if (model.kind == GraphModel::Kind::geometric && !(par > 0.0)) throw InvalidInput("radius: must be positive");

    std::mt19937_64 rng(seed);
    constexpr std::size_t max_draws = 1000;
    for (std::size_t draw = 0; draw < max_draws; ++draw) {
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        std::optional<std::vector<Vec2>> pos;
        if (model.kind == GraphModel::Kind::erdos_renyi) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (uniform(rng) < par) edges.emplace_back(i, j);
        } else {
            pos.emplace(n);
            for (auto& p : *pos) {
                p.x = uniform(rng);
                p.y = uniform(rng);
            }
            const double r2 = par * par;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const Vec2 d = (*pos)[i] - (*pos)[j];
                    if (dot(d, d) <= r2) edges.emplace_back(i, j);
                }
        }
        SimpleGraph g = SimpleGraph::from_edges(n, std::move(edges));
        g.positions = std::move(pos);
        g.seed = seed;
        g.retries = draw;
        if (is_connected(g)) return g;
    }
    throw InvalidInput(model.kind == GraphModel::Kind::erdos_renyi
                           ? "1000 consecutive disconnected draws; increase p"
                           : "1000 consecutive disconnected draws; increase the radius");
}

SparseOperator graph_laplacian(const SimpleGraph& g) {
    std::vector<SparseOperator::Entry> e;
    e.reserve(4 * g.edges.size() + g.n);
    for (std::size_t i = 0; i < g.n; ++i) e.push_back({i, i, 0.0});
    for (auto [i, j] : g.edges) {
        e.push_back({i, j, -1.0});
        e.push_back({j, i, -1.0});
        e.push_back({i, i, 1.0});
        e.push_back({j, j, 1.0});
    }
    return SparseOperator(g.n, std::move(e));
}

FiedlerResult fiedler(const SimpleGraph& g, GraphSolver solver) {
    if (g.n < 2 || !is_connected(g)) throw InvalidInput("graph is disconnected; lambda2 = 0 and the Fiedler vector is not unique");
    FiedlerResult out;
    if (solver == GraphSolver::dense) {
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.n), static_cast<Eigen::Index>(g.n));
        for (auto [i, j] : g.edges) {
            const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
            L(a, b) -= 1.0;
            L(b, a) -= 1.0;
            L(a, a) += 1.0;
            L(b, b) += 1.0;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
        if (es.info() != Eigen::Success) throw SolverError("dense Laplacian eigensolve failed");
        out.lambda2 = es.eigenvalues()(1);
        out.lambda3 = g.n > 2 ? es.eigenvalues()(2) : out.lambda2;
        const Eigen::VectorXd v = es.eigenvectors().col(1);
        out.vector.assign(v.data(), v.data() + v.size());
        remove_mean(out.vector);
        const double nv = std::sqrt(std::inner_product(out.vector.begin(), out.vector.end(), out.vector.begin(), 0.0));
        for (auto& x : out.vector) x /= nv;
    } else {
        OracleOptions opt;
        opt.gap_tol = degeneracy_tol;
        const std::vector<double> ones(g.n, 1.0);
        const auto res = deflated_inverse_iteration(graph_laplacian(g), ones, opt);
        out.lambda2 = res.mu;
        out.lambda3 = res.mu3;
        out.vector = res.vector;
    }
    out.vector = fix_sign(out.vector);
    out.degenerate = (out.lambda3 - out.lambda2) < degeneracy_tol * out.lambda2;
    return out;
}

RemovalRow removal_row(const SimpleGraph& g, const FiedlerResult& original, std::size_t node) {
    RemovalRow row{node, 0.0, std::abs(original.vector.at(node)), 0};
    const SimpleGraph sub = g.without(node);
    if (is_connected(sub))
        row.lambda2_residual = fiedler(sub, sub.n <= 200 ? GraphSolver::dense : GraphSolver::sparse).lambda2;
    std::size_t rank = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double a = std::abs(original.vector[i]);
        if (a < row.fiedler_abs || (a == row.fiedler_abs && i < node)) ++rank;
    }
    row.fiedler_rank = rank;
    return row;
}

RemovalSweep removal_sweep(const SimpleGraph& g, unsigned threads) {
    const auto f = fiedler(g);
    RemovalSweep sweep;
    sweep.lambda2 = f.lambda2;
    sweep.degenerate = f.degenerate;
    sweep.rows.resize(g.n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < g.n; i = next++) sweep.rows[i] = removal_row(g, f, i);
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(g.n));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    return sweep;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t s = 0; s < order.size();) {
        std::size_t e = s;
        while (e + 1 < order.size() && v[order[e + 1]] == v[order[s]]) ++e;
        for (std::size_t k = s; k <= e; ++k) rank[order[k]] = 0.5 * static_cast<double>(s + e);
        s = e + 1;
    }
    return rank;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

} // namespace

HeuristicReport heuristic_agreement(const RemovalSweep& sweep, double quantile) {
    if (!(quantile > 0.0 && quantile <= 1.0)) throw InvalidInput("quantile: must lie in (0, 1]");
    if (sweep.rows.empty()) throw InvalidInput("empty removal sweep");
    HeuristicReport rep;
    const std::size_t n = sweep.rows.size();
    rep.rank_limit = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n) - 1e-9));

    std::vector<double> lam(n), mag(n);
    for (std::size_t i = 0; i < n; ++i) {
        lam[i] = sweep.rows[i].lambda2_residual;
        mag[i] = sweep.rows[i].fiedler_abs;
    }
    const auto [lo, hi] = std::minmax_element(lam.begin(), lam.end());
    const double tie = 1e-9 * std::max(1.0, std::abs(*hi));
    rep.flat = *hi - *lo <= tie;
    rep.spearman = pearson(average_ranks(lam), average_ranks(mag));
    if (rep.flat) {
        rep.agreement = true;
        rep.argmin = sweep.rows.front().node;
        rep.argmin_rank = sweep.rows.front().fiedler_rank;
        return rep;
    }
    // Among tied minimisers, report the one the heuristic ranks best.
    bool found = false;
    for (const auto& row : sweep.rows) {
        if (row.lambda2_residual > *lo + tie) continue;
        if (!found || row.fiedler_rank < rep.argmin_rank) {
            rep.argmin = row.node;
            rep.argmin_rank = row.fiedler_rank;
            found = true;
        }
    }
    rep.agreement = rep.argmin_rank < rep.rank_limit;
    return rep;
}

double radius_for_degree(std::size_t n, double degree) {
    if (n < 2 || !(degree > 0.0) || degree >= static_cast<double>(n - 1)) throw InvalidInput("degree: must lie in (0, n-1)");
    // Probability that two uniform points of the unit square lie within r (r <= 1).
    auto pair_prob = [](double r) { return M_PI * r * r - 8.0 * r * r * r / 3.0 + 0.5 * r * r * r * r; };
    const double target = degree / static_cast<double>(n - 1);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pair_prob(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Relative residual of the least-squares fit of v by the columns of B.
double fit_mismatch(const std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    const auto n = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd B(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t c = 0; c < basis.size(); ++c)
        for (Eigen::Index i = 0; i < n; ++i) B(i, static_cast<Eigen::Index>(c)) = basis[c][static_cast<std::size_t>(i)];
    const Eigen::Map<const Eigen::VectorXd> y(v.data(), n);
    const Eigen::VectorXd coef = B.colPivHouseholderQr().solve(y);
    return (y - B * coef).norm() / y.norm();
}

} // namespace

ConsistencyReport continuum_consistency(std::size_t n, double radius, double grid_h, std::uint64_t seed) {
    if (!(grid_h > 0.0 && grid_h < 0.25)) throw InvalidInput("h: grid spacing must lie in (0, 0.25)");
    ConsistencyReport rep;
    rep.n = n;
    rep.radius = radius > 0.0 ? radius : radius_for_degree(n, 15.0);
    const auto g = generate_graph(GraphModel::geometric(rep.radius), n, seed);
    rep.average_degree = g.average_degree();
    const auto f = fiedler(g);
    rep.lambda2 = f.lambda2;

    const auto grid = build_grid(Shape::unit_square(), std::nullopt, grid_h);
    const auto oracle = second_eigenpair_oracle(assemble_neumann_laplacian(*grid), grid);
    std::vector<std::vector<double>> basis{std::vector<double>(n, 1.0)};
    for (const auto& psi : oracle.cluster) {
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) s[i] = interpolate(psi, (*g.positions)[i]).value;
        basis.push_back(std::move(s));
    }
    rep.mismatch = fit_mismatch(f.vector, basis);

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t c = 1; c < basis.size(); ++c)
        for (auto& x : basis[c]) x = uniform(rng) - 0.5;
    rep.control_mismatch = fit_mismatch(f.vector, basis);
    return rep;
}

void write_edge_list(std::ostream& os, const SimpleGraph& g) {
    os << "n=" << g.n << '\n';
    for (auto [i, j] : g.edges) os << i << ' ' << j << '\n';
}

SimpleGraph read_edge_list(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::size_t> n;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (!n) {
            if (line.rfind("n=", 0) != 0) throw InvalidInput("edge list line " + std::to_string(lineno) + ": expected header n=<count>");
            std::size_t count = 0;
            ls.ignore(2);
            if (!(ls >> count)) throw InvalidInput("edge list line " + std::to_string(lineno) + ": bad node count");
            n = count;
            continue;
        }
        long long i = 0, j = 0;
        std::string rest;
        if (!(ls >> i >> j) || (ls >> rest) || i < 0 || j < 0)
            throw InvalidInput("edge list line " + std::to_string(lineno) + ": expected two node ids");
        edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    if (!n) throw InvalidInput("edge list: missing header n=<count>");
    return SimpleGraph::from_edges(*n, std::move(edges));
}

void write_removal_csv(std::ostream& os, const RemovalSweep& sweep) {
    const auto old = os.precision(12);
    os << "node,lambda2_residual,fiedler_abs,fiedler_rank\n";
    for (const auto& r : sweep.rows)
        os << r.node << ',' << r.lambda2_residual << ',' << r.fiedler_abs << ',' << r.fiedler_rank << '\n';
    os.precision(old);
}

} // namespace critreg
