#pragma once

#include "critreg/linalg.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace critreg {

enum class Renormalization { each_step, drift_triggered };

struct FlowConfig {
    double dt = 0.0;            // 0 selects default_dt(K, grid)
    double tol = 1e-8;          // stop when ||-A psi + J psi||_M <= tol
    std::size_t max_steps = 400000;
    Renormalization renormalization = Renormalization::each_step;
    double drift_tol = 1e-10;   // used by drift_triggered
    bool polish = false;        // hand over to the oracle once J stagnates
    std::size_t stagnation_window = 100;
    double stagnation_rel = 1e-6;
    std::size_t min_steps_before_polish = 2000;
    bool record_trace = true;
    std::size_t trace_stride = 1;

};

/// Gershgorin bound on the largest eigenvalue of B^-1 K; equals 8/h^2 on an uncut grid.
double spectral_bound(const SparseOperator& K, const Grid& grid);
/// Explicit Euler stability limit 2/spectral_bound (h^2/4 on an uncut grid).
double stability_bound(const SparseOperator& K, const Grid& grid);
/// Half the stability limit (h^2/8 on an uncut grid); J is then nonincreasing step by step.
double default_dt(const SparseOperator& K, const Grid& grid);

struct FlowRecord {
    std::size_t step;
    double energy;     // J(psi)
    double grad_norm;  // ||-A psi + J psi||_M before the step
    double norm_drift; // ||psi||_M - 1 after projection
    double mean_drift; // <psi, 1>_M after projection
};

struct FlowTrace {
    std::vector<FlowRecord> records;
    bool polished = false;
    std::size_t polish_step = 0;

    /// CSV with header `step,J,grad_norm,norm_drift,mean_drift`.
    void write_csv(std::ostream& os) const;
};

struct FlowResult {
    EigenPair pair;
    FlowTrace trace;
    bool converged = false;
    std::size_t steps = 0;
};

/// Rayleigh quotient h^2 psi^T K psi / ||psi||_M^2, i.e. J(psi) on the constraint set.
double flow_energy(const SparseOperator& K, const GridField& psi);

/// Removes the M-mean and scales to unit M-norm. Throws InvalidInput for constant fields.
std::vector<double> project_to_constraints(std::span<const double> psi, std::span<const double> mass);
GridField project_to_constraints(const GridField& psi);

/// One explicit Euler step of d/dt psi = Laplace(psi) + J(psi) psi (discretely
/// -B^-1 K psi + J psi) followed by re-projection. Throws SolverError when not finite.
GridField flow_step(const SparseOperator& K, const GridField& psi, double dt);

/// Deterministic seeded uniform noise, centred and normalised.
GridField random_initial_field(GridPtr grid, std::uint64_t seed);

/// Integrates the projected gradient flow to an equilibrium.
FlowResult run_flow(const SparseOperator& A, const GridField& psi0, FlowConfig cfg);

} // namespace critreg
