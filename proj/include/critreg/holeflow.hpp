#pragma once

#include "critreg/eigenflow.hpp"
#include "critreg/geometry.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace critreg {

/// Vector and scalar integrals over the hole boundary circle. Vector integrals use the
/// circle's outward normal (pointing away from the hole centre, into the residual domain).
struct BoundaryIntegrals {
    Vec2 grad_sq;       // integral of |grad psi|^2 n
    Vec2 value_sq;      // integral of psi^2 n
    Vec2 value;         // integral of psi n
    double sum_sq = 0;  // integral of psi^2
    double sum = 0;     // integral of psi
    bool extrapolated = false;
};

/// Quadrature with `m` nodes. Values are sampled on the circle; the tangential gradient is the
/// derivative of their trigonometric interpolant and the normal gradient is read on the
/// concentric circle of radius r + offset_cells * h.
BoundaryIntegrals boundary_integrals(const GridField& psi, const Hole& hole, int m, double offset_cells);

/// Shape gradient of x -> mu2(domain minus B_r(x)): the circle-normal form of
/// -(integral |grad psi|^2 n) + mu (integral psi^2 n) with n the residual domain's normal.
Vec2 mu2_gradient(const BoundaryIntegrals& integrals, double mu);

struct HoleVelocity {
    Vec2 v;             // velocity after the boundary projection
    Vec2 v_int;         // unconstrained descent direction
    double a = 0.0;     // normalisation correction coefficient
    double b = 0.0;     // mean correction coefficient
    bool on_boundary = false;
};

/// Descent velocity v_int = -(shape gradient), tangentialised on the boundary of the
/// admissible set when it points outward; a and b are the correction coefficients of the
/// coupled dynamics (diagnostics in the quasi-static realisation).
HoleVelocity hole_velocity(const BoundaryIntegrals& integrals, double J, const AdmissibleSet& adm, Vec2 x,
                           double residual_area);

struct HoleFlowConfig {
    double r = 0.1;
    double h = 0.02;
    int quadrature = 64;
    double gradient_offset = 1.5; // grid cells
    double inner_tol = 1e-8;
    std::size_t inner_max_steps = 3000;
    double v_tol = 1e-3;
    std::size_t max_outer = 300;
    double step_fraction = 0.1; // outer step length cap, as a fraction of r
    double v_floor = 0.01;      // below this speed the step shrinks proportionally
    std::uint64_t seed = 0;

    /// Throws InvalidInput naming the offending field.
    void validate() const;
};

struct HoleRecord {
    std::size_t step;
    double t;
    Vec2 x;
    double mu2;
    double v_norm;
    bool on_boundary;
    bool degenerate;
    double a;
    double b;
    double norm_drift;
    double mean_drift;
};

struct HoleTrajectory {
    std::vector<HoleRecord> records;
    bool converged = false;
    double critical_residual = 0.0; // |-I_grad + mu2 I_sq| at the final position
    GridField final_psi;

    /// CSV with header `step,t,x,y,mu2,v_norm,on_boundary,degenerate`.
    void write_csv(std::ostream& os) const;
};

/// Quasi-static hole-placement dynamics: the eigenfunction is relaxed on each residual
/// domain before the hole centre moves along the projected velocity.
HoleTrajectory run_hole_flow(const Shape& shape, Vec2 x0, const HoleFlowConfig& cfg);

/// Eigenpair of the residual domain for a hole centred at x: warm-started flow, handed to
/// the oracle when it stagnates.
struct InnerSolve {
    GridPtr grid;
    EigenPair pair;
    bool degenerate = false;
};
InnerSolve solve_residual_domain(const Shape& shape, const Hole& hole, double h, const GridField* warm,
                                 const HoleFlowConfig& cfg);

/// Transfers a field to another grid on the same lattice; cells without a source value
/// take the nearest source value. The result is projected onto the constraint set.
GridField transfer_field(const GridField& from, GridPtr to);

struct SweepEntry {
    Vec2 x;
    double mu2 = 0.0;
    double gap = 0.0;
    bool degenerate = false;
    std::string error; // empty on success
};

/// Oracle mu2 of the residual domain for each position (independent, run concurrently,
/// returned in input order).
std::vector<SweepEntry> mu2_vs_position_sweep(const Shape& shape, double r, double h,
                                              const std::vector<Vec2>& positions, unsigned threads = 0);

/// Sweep CSV with header `x,y,mu2,gap`.
void write_sweep_csv(std::ostream& os, const std::vector<SweepEntry>& entries);

} // namespace critreg
