#pragma once

#include "critreg/discretize.hpp"
#include "critreg/sparse.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace critreg {

// Diagonally weighted inner product <u, v>_M = sum m_i u_i v_i. For grids m is the cell
// mass (h^2 times the uncovered fraction), so <u, v>_M approximates the integral of u v.
// Graphs use m = 1.
double inner(std::span<const double> a, std::span<const double> b, std::span<const double> mass);
double weighted_norm(std::span<const double> a, std::span<const double> mass);
/// <u, 1>_M
double weighted_sum(std::span<const double> a, std::span<const double> mass);
/// Subtracts the M-weighted mean in place.
void remove_weighted_mean(std::span<double> a, std::span<const double> mass);
/// Subtracts the arithmetic mean in place.
void remove_mean(std::span<double> a);

struct CgOptions {
    double tol = 1e-12;          // relative residual
    std::size_t max_iter = 20000;
    bool deflate_constant = true; // keep iterates zero-mean (singular Neumann/graph Laplacians)
};

struct CgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// Solves (A + shift I) x = b by conjugate gradients. With `deflate_constant`, b and every
/// iterate are projected onto the zero-mean subspace. Throws SolverError on non-convergence.
CgResult conjugate_gradient_solve(const SparseOperator& A, std::span<const double> b, double shift,
                                  const CgOptions& opt = {});

/// Returns v or -v so that the entry of largest magnitude is positive (ties: lowest index).
std::vector<double> fix_sign(std::span<const double> v);

enum class InnerSolver { direct, cg };

struct OracleOptions {
    double gap_tol = 1e-3;       // relative (mu3 - mu2)/mu2 below this flags degeneracy
    double residual_tol = 1e-11; // on ||K v - mu B v|| / ||K||_inf for B-unit v
    std::size_t block = 4;
    std::size_t max_iter = 1000;
    InnerSolver solver = InnerSolver::direct;
    std::uint64_t seed = 0x5eed;
};

/// Lowest nonzero eigenpairs of K v = mu B v for a connected Laplacian K and a positive
/// diagonal B, restricted to the B-mean-zero subspace.
struct SpectralResult {
    double mu = 0.0;                          // smallest nonzero eigenvalue
    double mu3 = 0.0;                         // next Ritz value (gap estimate)
    std::vector<double> vector;               // B-unit, B-mean-zero, sign-fixed
    double residual = 0.0;                    // ||K v - mu B v||
    bool degenerate = false;
    std::vector<std::vector<double>> cluster; // B-orthonormal basis of the mu cluster
    std::vector<double> ritz_values;
    std::size_t iterations = 0;
};

/// Deflated block inverse iteration with Rayleigh-Ritz; inner solves by sparse Cholesky
/// of the pinned operator or by deflated CG. `b` is the diagonal of B.
SpectralResult deflated_inverse_iteration(const SparseOperator& K, std::span<const double> b,
                                          const OracleOptions& opt = {});

struct EigenPair {
    double mu = 0.0;
    GridField psi;          // ||psi||_M = 1, <psi, 1>_M = 0
    double residual = 0.0;  // ||K psi - mu B psi|| for B-unit psi
    double mu3 = 0.0;
    bool degenerate = false;

    [[nodiscard]] double gap() const { return mu3 - mu; }
};

struct OracleResult {
    EigenPair pair;
    std::vector<GridField> cluster; // M-orthonormal basis of the (near-)degenerate mu2 eigenspace
    std::size_t iterations = 0;
};

/// Independent eigensolver for the second Neumann eigenpair of a grid operator.
OracleResult second_eigenpair_oracle(const SparseOperator& K, GridPtr grid, const OracleOptions& opt = {});

/// Within a degenerate cluster, the unit combination best aligned with `target`.
GridField align_in_cluster(const std::vector<GridField>& cluster, std::span<const double> target);

} // namespace critreg
