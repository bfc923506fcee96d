#include "critreg/holeflow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace critreg {

namespace {

// Derivative in theta of the trigonometric interpolant of equispaced samples.
std::vector<double> periodic_derivative(const std::vector<double>& f) {
    const std::size_t m = f.size();
    const std::size_t top = (m - 1) / 2;
    std::vector<double> out(m, 0.0);
    for (std::size_t n = 1; n <= top; ++n) {
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double th = 2.0 * M_PI * static_cast<double>(n * j % m) / static_cast<double>(m);
            a += f[j] * std::cos(th);
            b += f[j] * std::sin(th);
        }
        a *= 2.0 / static_cast<double>(m);
        b *= 2.0 / static_cast<double>(m);
        for (std::size_t j = 0; j < m; ++j) {
            const double th = 2.0 * M_PI * static_cast<double>(n * j % m) / static_cast<double>(m);
            out[j] += static_cast<double>(n) * (b * std::cos(th) - a * std::sin(th));
        }
    }
    return out;
}

} // namespace

BoundaryIntegrals boundary_integrals(const GridField& psi, const Hole& hole, int m, double offset_cells) {
    const double h = psi.grid->spacing();
    const double shift = offset_cells * h;
    const auto nodes = circle_quadrature(hole, m);
    std::vector<double> values(nodes.size());
    std::vector<double> normal_grad(nodes.size());
    BoundaryIntegrals out;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto& node = nodes[k];
        try {
            const auto value = interpolate(psi, node.point);
            const auto grad = interpolate_gradient(psi, node.point + shift * node.normal);
            values[k] = value.value;
            normal_grad[k] = dot(grad.gradient, node.normal);
            out.extrapolated = out.extrapolated || value.extrapolated || grad.extrapolated;
        } catch (const InvalidInput& e) {
            std::ostringstream os;
            os << "boundary quadrature point (" << node.point.x << "," << node.point.y
               << ") cannot be interpolated: " << e.what();
            throw InvalidInput(os.str());
        }
    }
    // The tangential gradient decays quickly away from the hole, so it is taken along the
    // circle itself; only the small normal part comes from the offset stencil.
    const auto dtheta = periodic_derivative(values);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto& node = nodes[k];
        const double gt = dtheta[k] / hole.radius;
        const double g2 = gt * gt + normal_grad[k] * normal_grad[k];
        const double v = values[k];
        out.grad_sq += (node.weight * g2) * node.normal;
        out.value_sq += (node.weight * v * v) * node.normal;
        out.value += (node.weight * v) * node.normal;
        out.sum_sq += node.weight * v * v;
        out.sum += node.weight * v;
    }
    return out;
}

Vec2 mu2_gradient(const BoundaryIntegrals& integrals, double mu) {
    // The residual domain's outward normal on the circle is minus the stored one.
    return -integrals.grad_sq + mu * integrals.value_sq;
}

HoleVelocity hole_velocity(const BoundaryIntegrals& integrals, double J, const AdmissibleSet& adm, Vec2 x,
                           double residual_area) {
    HoleVelocity out;
    out.v_int = -1.0 * mu2_gradient(integrals, J);
    out.v = out.v_int;
    const double r = adm.erosion_radius();
    const auto box = adm.shape().bounding_box();
    const double band = 1e-6 * std::max(1.0, norm(box.hi - box.lo));
    if (adm.shape().signed_distance(x) > -r - band) {
        out.on_boundary = true;
        // Outward normal of the admissible set: towards the nearest point of the outer boundary.
        const Vec2 q = adm.shape().closest_boundary_point(x);
        const Vec2 n = (1.0 / norm(q - x)) * (q - x);
        const double vn = dot(out.v_int, n);
        if (vn > 0.0) out.v = out.v_int - vn * n;
    }
    // Residual-domain normals flip the sign of both circle integrals.
    out.a = 0.5 * dot(out.v, integrals.value_sq);
    out.b = dot(out.v, integrals.value) / residual_area;
    return out;
}

void HoleFlowConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& why) { throw InvalidInput(key + ": " + why); };
    if (!(r > 0.0)) fail("r", "hole radius must be positive");
    if (!(h > 0.0)) fail("h", "grid spacing must be positive");
    if (!(h < r / 3.0)) fail("h", "hole is under-resolved: need h < r/3");
    if (quadrature < 32) fail("quadrature", "need at least 32 nodes on the hole boundary");
    if (gradient_offset < 1.0 || gradient_offset > 3.0) fail("gradient_offset", "must lie in [1, 3] cells");
    if (!(inner_tol > 0.0)) fail("inner_tol", "must be positive");
    if (!(v_tol > 0.0)) fail("v_tol", "must be positive");
    if (!(step_fraction > 0.0) || step_fraction > 0.5) fail("step_fraction", "must lie in (0, 0.5]");
    if (!(v_floor > 0.0)) fail("v_floor", "must be positive");
}

void HoleTrajectory::write_csv(std::ostream& os) const {
    os << "step,t,x,y,mu2,v_norm,on_boundary,degenerate\n";
    const auto old = os.precision(12);
    for (const auto& r : records)
        os << r.step << ',' << r.t << ',' << r.x.x << ',' << r.x.y << ',' << r.mu2 << ',' << r.v_norm << ','
           << (r.on_boundary ? 1 : 0) << ',' << (r.degenerate ? 1 : 0) << '\n';
    os.precision(old);
}

GridField transfer_field(const GridField& from, GridPtr to) {
    const Grid& src = *from.grid;
    if (src.nx() != to->nx() || src.ny() != to->ny() || src.spacing() != to->spacing())
        throw InvalidInput("field transfer needs grids on the same lattice");
    std::vector<double> v(to->active_count());
    for (std::size_t k = 0; k < to->active_count(); ++k) {
        const auto& c = to->cell(k);
        auto idx = src.index(c.i, c.j);
        for (int ring = 1; idx == Grid::inactive && ring < std::max(src.nx(), src.ny()); ++ring) {
            double best = std::numeric_limits<double>::infinity();
            for (int dj = -ring; dj <= ring; ++dj)
                for (int di = -ring; di <= ring; ++di) {
                    if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
                    const auto cand = src.index(c.i + di, c.j + dj);
                    const double d2 = di * di + dj * dj;
                    if (cand != Grid::inactive && d2 < best) {
                        best = d2;
                        idx = cand;
                    }
                }
        }
        if (idx == Grid::inactive) throw InvalidInput("source field has no active cells");
        v[k] = from.values[static_cast<std::size_t>(idx)];
    }
    return GridField(to, project_to_constraints(v, to->mass()));
}

InnerSolve solve_residual_domain(const Shape& shape, const Hole& hole, double h, const GridField* warm,
                                 const HoleFlowConfig& cfg) {
    InnerSolve out;
    out.grid = build_grid(shape, hole, h);
    const auto K = assemble_neumann_laplacian(*out.grid);
    const GridField psi0 = warm ? transfer_field(*warm, out.grid) : random_initial_field(out.grid, cfg.seed);

    const auto oracle = second_eigenpair_oracle(K, out.grid);
    FlowConfig fc;
    fc.tol = cfg.inner_tol;
    fc.max_steps = cfg.inner_max_steps;
    fc.record_trace = false;
    auto flow = run_flow(K, psi0, fc);
    if (!flow.converged) {
        // Flow rate is set by the spectral gap; finish on the oracle's eigenspace.
        auto aligned = align_in_cluster(oracle.cluster, flow.pair.psi.values);
        flow.pair.psi = GridField(out.grid, fix_sign(project_to_constraints(aligned.values, out.grid->mass())));
        flow.pair.mu = flow_energy(K, flow.pair.psi);
    }
    out.pair = flow.pair;
    out.pair.mu3 = oracle.pair.mu3;
    out.pair.degenerate = oracle.pair.degenerate;
    out.degenerate = oracle.pair.degenerate;
    return out;
}

HoleTrajectory run_hole_flow(const Shape& shape, Vec2 x0, const HoleFlowConfig& cfg) {
    cfg.validate();
    const AdmissibleSet adm(shape, cfg.r);
    if (!adm.contains(x0)) throw InvalidInput("x0: initial hole centre is not admissible (need dist(x0, boundary) > r)");
    const auto box = shape.bounding_box();
    const double inset = 5e-7 * std::max(1.0, norm(box.hi - box.lo));
    const double residual_area = shape.area() - M_PI * cfg.r * cfg.r;

    HoleTrajectory traj;
    Vec2 x = x0;
    double t = 0.0;
    std::optional<GridField> warm;
    for (std::size_t step = 0;; ++step) {
        const Hole hole{x, cfg.r};
        auto inner = solve_residual_domain(shape, hole, cfg.h, warm ? &*warm : nullptr, cfg);
        const auto& psi = inner.pair.psi;
        const auto integrals = boundary_integrals(psi, hole, cfg.quadrature, cfg.gradient_offset);
        const auto vel = hole_velocity(integrals, inner.pair.mu, adm, x, residual_area);
        const double speed = norm(vel.v);
        const auto& mass = inner.grid->mass();
        traj.records.push_back({step, t, x, inner.pair.mu, speed, vel.on_boundary, inner.degenerate, vel.a, vel.b,
                                weighted_norm(psi.values, mass) - 1.0, weighted_sum(psi.values, mass)});
        traj.critical_residual = norm(mu2_gradient(integrals, inner.pair.mu));
        traj.final_psi = psi;
        if (!std::isfinite(inner.pair.mu) || !std::isfinite(speed)) throw SolverError("hole flow produced non-finite values");
        if (speed <= cfg.v_tol) {
            traj.converged = true;
            break;
        }
        if (step >= cfg.max_outer) break;

        const double eta = cfg.step_fraction * cfg.r / std::max(speed, cfg.v_floor);
        Vec2 next = x + eta * vel.v;
        const auto proj = adm.project(next);
        next = proj.normal ? proj.point - inset * *proj.normal : proj.point;
        if (!(shape.signed_distance(next) < -cfg.r)) throw SolverError("hole centre left the admissible set");
        t += eta;
        x = next;
        warm = psi;
    }
    return traj;
}

std::vector<SweepEntry> mu2_vs_position_sweep(const Shape& shape, double r, double h,
                                              const std::vector<Vec2>& positions, unsigned threads) {
    std::vector<SweepEntry> out(positions.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < positions.size(); k = next++) {
            auto& e = out[k];
            e.x = positions[k];
            try {
                const auto grid = build_grid(shape, Hole{positions[k], r}, h);
                const auto K = assemble_neumann_laplacian(*grid);
                const auto o = second_eigenpair_oracle(K, grid);
                e.mu2 = o.pair.mu;
                e.gap = o.pair.gap();
                e.degenerate = o.pair.degenerate;
            } catch (const std::exception& ex) {
                e.mu2 = std::numeric_limits<double>::quiet_NaN();
                e.gap = std::numeric_limits<double>::quiet_NaN();
                e.error = ex.what();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, positions.size())));
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepEntry>& entries) {
    os << "x,y,mu2,gap\n";
    const auto old = os.precision(12);
    for (const auto& e : entries) os << e.x.x << ',' << e.x.y << ',' << e.mu2 << ',' << e.gap << '\n';
    os.precision(old);
}

} // namespace critreg
