#include "critreg/eigenflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace critreg {

double spectral_bound(const SparseOperator& K, const Grid& grid) {
    double g = 0.0;
    for (std::size_t i = 0; i < K.size(); ++i) g = std::max(g, 2.0 * K.diagonal(i) / grid.area_fraction(i));
    return g;
}

double stability_bound(const SparseOperator& K, const Grid& grid) { return 2.0 / spectral_bound(K, grid); }

double default_dt(const SparseOperator& K, const Grid& grid) { return 1.0 / spectral_bound(K, grid); }

double flow_energy(const SparseOperator& K, const GridField& psi) {
    const auto& grid = *psi.grid;
    return grid.cell_area() * K.quadratic_form(psi.values) / inner(psi.values, psi.values, grid.mass());
}

std::vector<double> project_to_constraints(std::span<const double> psi, std::span<const double> mass) {
    std::vector<double> out(psi.begin(), psi.end());
    double scale = 0.0;
    for (double v : out) scale = std::max(scale, std::abs(v));
    double total = 0.0;
    for (double m : mass) total += m;
    remove_weighted_mean(out, mass);
    const double nrm = weighted_norm(out, mass);
    if (!(nrm > 1e-13 * scale * std::sqrt(total)) || nrm == 0.0)
        throw InvalidInput("initial condition in nullspace: field is constant");
    for (auto& v : out) v /= nrm;
    return out;
}

GridField project_to_constraints(const GridField& psi) {
    return GridField(psi.grid, project_to_constraints(psi.values, psi.grid->mass()));
}

namespace {

// out = -B^-1 K psi + J psi, returns J.
double flow_direction(const SparseOperator& K, const Grid& grid, std::span<const double> psi,
                      std::span<double> kpsi, std::span<double> out) {
    K.apply(psi, kpsi);
    const auto& mass = grid.mass();
    const double h2 = grid.cell_area();
    double pkp = 0.0, pmp = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        pkp += psi[i] * kpsi[i];
        pmp += mass[i] * psi[i] * psi[i];
    }
    const double J = h2 * pkp / pmp;
    for (std::size_t i = 0; i < psi.size(); ++i) out[i] = -h2 * kpsi[i] / mass[i] + J * psi[i];
    return J;
}

void check_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x))
            throw SolverError("flow step produced non-finite values; dt exceeds the stability bound (h^2/4 on an uncut grid)");
}

} // namespace

GridField flow_step(const SparseOperator& K, const GridField& psi, double dt) {
    const auto& grid = *psi.grid;
    const std::size_t n = psi.values.size();
    std::vector<double> kpsi(n), dir(n), next(n);
    flow_direction(K, grid, psi.values, kpsi, dir);
    for (std::size_t i = 0; i < n; ++i) next[i] = psi.values[i] + dt * dir[i];
    check_finite(next);
    return GridField(psi.grid, project_to_constraints(next, grid.mass()));
}

GridField random_initial_field(GridPtr grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> v(grid->active_count());
    for (auto& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    auto p = project_to_constraints(v, grid->mass());
    return GridField(std::move(grid), std::move(p));
}

void FlowTrace::write_csv(std::ostream& os) const {
    os << "step,J,grad_norm,norm_drift,mean_drift\n";
    const auto old = os.precision(17);
    for (const auto& r : records)
        os << r.step << ',' << r.energy << ',' << r.grad_norm << ',' << r.norm_drift << ',' << r.mean_drift << '\n';
    os.precision(old);
}

FlowResult run_flow(const SparseOperator& K, const GridField& psi0, FlowConfig cfg) {
    const auto& grid = psi0.grid;
    if (!grid || grid->active_count() != K.size()) throw InvalidInput("initial field does not match the operator");
    const auto& mass = grid->mass();
    if (cfg.dt == 0.0) cfg.dt = default_dt(K, *grid);
    if (!(cfg.dt > 0.0) || cfg.dt > stability_bound(K, *grid) * (1 + 1e-12))
        throw InvalidInput("flow time step must satisfy 0 < dt <= stability bound (h^2/4 on an uncut grid)");
    if (!(cfg.tol > 0.0)) throw InvalidInput("flow tolerance must be positive");
    if (cfg.trace_stride == 0) cfg.trace_stride = 1;

    const std::size_t n = K.size();
    std::vector<double> psi = project_to_constraints(psi0.values, mass);
    std::vector<double> kpsi(n), dir(n);
    FlowResult out;
    std::vector<double> history;

    for (std::size_t step = 0;; ++step) {
        const double J = flow_direction(K, *grid, psi, kpsi, dir);
        double gg = 0.0, pp = 0.0, sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            gg += mass[i] * dir[i] * dir[i];
            pp += mass[i] * psi[i] * psi[i];
            sum += mass[i] * psi[i];
        }
        const double grad_norm = std::sqrt(gg);
        if (cfg.record_trace && (step % cfg.trace_stride == 0))
            out.trace.records.push_back({step, J, grad_norm, std::sqrt(pp) - 1.0, sum});
        out.steps = step;

        if (grad_norm <= cfg.tol) {
            out.converged = true;
            break;
        }
        if (cfg.polish) {
            history.push_back(J);
            if (step >= cfg.min_steps_before_polish && history.size() > cfg.stagnation_window) {
                const double old = history[history.size() - 1 - cfg.stagnation_window];
                if (std::abs(old - J) <= cfg.stagnation_rel * std::abs(J)) {
                    auto oracle = second_eigenpair_oracle(K, grid);
                    psi = project_to_constraints(align_in_cluster(oracle.cluster, psi).values, mass);
                    out.trace.polished = true;
                    out.trace.polish_step = step;
                    out.converged = true;
                    break;
                }
            }
        }
        if (step >= cfg.max_steps) break;

        for (std::size_t i = 0; i < n; ++i) psi[i] += cfg.dt * dir[i];
        check_finite(psi);
        if (cfg.renormalization == Renormalization::each_step) {
            psi = project_to_constraints(psi, mass);
        } else {
            const double nd = std::abs(weighted_norm(psi, mass) - 1.0);
            const double md = std::abs(weighted_sum(psi, mass));
            if (nd > cfg.drift_tol || md > cfg.drift_tol) psi = project_to_constraints(psi, mass);
        }
    }

    const double J = flow_direction(K, *grid, psi, kpsi, dir);
    out.pair.mu = J;
    out.pair.residual = weighted_norm(dir, mass);
    out.pair.mu3 = std::numeric_limits<double>::quiet_NaN();
    out.pair.psi = GridField(grid, fix_sign(psi));
    return out;
}

} // namespace critreg
