#pragma once

#include "critreg/geometry.hpp"
#include "critreg/sparse.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace critreg {

/// Undirected simple graph on nodes 0..n-1. Edges are stored as (i, j) with i < j, sorted.
struct SimpleGraph {
    std::size_t n = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::optional<std::vector<Vec2>> positions;
    std::uint64_t seed = 0;
    std::size_t retries = 0; // disconnected draws rejected by the generator

    /// Validates indices, self-loops and duplicates; the edge order is normalised.
    static SimpleGraph from_edges(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges);

    [[nodiscard]] std::vector<std::vector<std::size_t>> adjacency() const;
    [[nodiscard]] double average_degree() const { return n ? 2.0 * static_cast<double>(edges.size()) / n : 0.0; }
    /// Subgraph induced by all nodes except `node`, relabelled in increasing order.
    [[nodiscard]] SimpleGraph without(std::size_t node) const;
};

struct GraphModel {
    enum class Kind { erdos_renyi, geometric };
    Kind kind = Kind::erdos_renyi;
    double parameter = 0.15; // edge probability or linking radius

    static GraphModel erdos_renyi(double p) { return {Kind::erdos_renyi, p}; }
    static GraphModel geometric(double radius) { return {Kind::geometric, radius}; }
};

/// Draws from the model until the graph is connected (at most 1000 draws).
/// Geometric graphs place nodes uniformly in the unit square.
SimpleGraph generate_graph(const GraphModel& model, std::size_t n, std::uint64_t seed);

bool is_connected(const SimpleGraph& g);

/// Combinatorial Laplacian D - A.
SparseOperator graph_laplacian(const SimpleGraph& g);

struct FiedlerResult {
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    std::vector<double> vector; // unit norm, zero mean, sign-fixed
    bool degenerate = false;    // (lambda3 - lambda2)/lambda2 < 1e-8
};

enum class GraphSolver { sparse, dense };

/// Throws InvalidInput for a disconnected graph.
FiedlerResult fiedler(const SimpleGraph& g, GraphSolver solver = GraphSolver::sparse);

struct RemovalRow {
    std::size_t node;
    double lambda2_residual; // 0 when removing the node disconnects the graph
    double fiedler_abs;      // |v_i| of the original graph's Fiedler vector
    std::size_t fiedler_rank; // 0 = smallest |v_i|; ties by node id
};

struct RemovalSweep {
    double lambda2 = 0.0;
    bool degenerate = false;
    std::vector<RemovalRow> rows;
};

/// Exhaustive removal of every node. Residual graphs with at most 200 nodes use the dense
/// eigensolver so the sweep does not depend on the sparse path.
RemovalSweep removal_sweep(const SimpleGraph& g, unsigned threads = 0);
/// One row recomputed from scratch.
RemovalRow removal_row(const SimpleGraph& g, const FiedlerResult& original, std::size_t node);

struct HeuristicReport {
    bool agreement = false;
    bool flat = false;          // all residual lambda2 equal
    std::size_t argmin = 0;
    std::size_t argmin_rank = 0;
    std::size_t rank_limit = 0; // agreement when argmin_rank < rank_limit
    double spearman = 0.0;      // rank correlation of lambda2_residual with |v_i|
};

HeuristicReport heuristic_agreement(const RemovalSweep& sweep, double quantile);

struct ConsistencyReport {
    std::size_t n = 0;
    double radius = 0.0;
    double average_degree = 0.0;
    double lambda2 = 0.0;
    double mismatch = 0.0;         // ||v - P v|| / ||v||, P onto the sampled mu2 eigenspace
    double control_mismatch = 0.0; // same with random fields in place of the eigenfunctions
};

/// Radius whose expected degree in the unit square is `degree` for n uniform nodes.
double radius_for_degree(std::size_t n, double degree);

/// Geometric graph Fiedler vector against the unit-square grid eigenfunctions sampled at the
/// nodes. The grid eigenvalue is double, so v is fitted over the whole eigenspace.
/// radius <= 0 picks the radius for average degree 15.
ConsistencyReport continuum_consistency(std::size_t n, double radius, double grid_h, std::uint64_t seed);

void write_edge_list(std::ostream& os, const SimpleGraph& g);
/// Header `n=<count>`, then `i j` per line. Throws InvalidInput with the line number.
SimpleGraph read_edge_list(std::istream& is);
void write_removal_csv(std::ostream& os, const RemovalSweep& sweep);

} // namespace critreg
