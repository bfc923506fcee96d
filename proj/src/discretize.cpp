#include "critreg/discretize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace critreg {

namespace {

constexpr std::array<std::array<int, 2>, 4> kNeighbors{{{-1, 0}, {0, -1}, {1, 0}, {0, 1}}};

} // namespace

double Grid::hole_fraction(Vec2 p) const {
    if (!hole_) return 1.0;
    const double s = (norm(p - hole_->center) - hole_->radius) / h_;
    return 0.5 * (1.0 + std::erf(s));
}

double Grid::face_fraction(int i, int j, int dir) const {
    if (!hole_) return 1.0;
    const Vec2 c = center(i, j);
    return hole_fraction(dir == 0 ? c + Vec2{0.5 * h_, 0.0} : c + Vec2{0.0, 0.5 * h_});
}

double Grid::total_area() const {
    double a = 0.0;
    for (double m : mass_) a += m;
    return a;
}

int Grid::active_neighbors(std::size_t k) const {
    const auto& c = cells_[k];
    int count = 0;
    for (auto [di, dj] : kNeighbors) count += active(c.i + di, c.j + dj) ? 1 : 0;
    return count;
}

bool Grid::interior(std::size_t k) const {
    const auto& c = cells_[k];
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di)
            if (!active(c.i + di, c.j + dj)) return false;
    return true;
}

GridPtr build_grid(const Shape& shape, const std::optional<Hole>& hole, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("grid spacing h must be positive");
    if (hole) {
        if (!(h < hole->radius / 3.0)) throw InvalidInput("hole is under-resolved: need h < r/3");
        make_hole(shape, hole->center, hole->radius);
    }

    auto grid = std::shared_ptr<Grid>(new Grid(shape, hole));
    const auto box = shape.bounding_box();
    const double pad = 2.0 * h;
    const double w = box.hi.x - box.lo.x + 2 * pad;
    const double hgt = box.hi.y - box.lo.y + 2 * pad;
    grid->h_ = h;
    grid->nx_ = static_cast<int>(std::ceil(w / h - 1e-9));
    grid->ny_ = static_cast<int>(std::ceil(hgt / h - 1e-9));
    const Vec2 mid = 0.5 * (box.lo + box.hi);
    grid->origin_ = {mid.x - 0.5 * grid->nx_ * h, mid.y - 0.5 * grid->ny_ * h};
    grid->index_.assign(static_cast<std::size_t>(grid->nx_) * grid->ny_, Grid::inactive);

    for (int j = 0; j < grid->ny_; ++j) {
        for (int i = 0; i < grid->nx_; ++i) {
            const Vec2 c = grid->center(i, j);
            if (!(shape.signed_distance(c) < 0.0)) continue;
            const double fraction = grid->hole_fraction(c);
            if (fraction < Grid::min_fraction) continue;
            grid->index_[static_cast<std::size_t>(j) * grid->nx_ + i] =
                static_cast<std::int64_t>(grid->cells_.size());
            grid->cells_.push_back({i, j, c});
            grid->fraction_.push_back(fraction);
            grid->mass_.push_back(fraction * h * h);
        }
    }
    if (grid->cells_.size() < 2) throw InvalidInput("grid has fewer than two active cells; reduce h");

    // Connectivity of the active 4-neighbour graph.
    std::vector<int> component(grid->cells_.size(), -1);
    std::vector<std::size_t> sizes;
    for (std::size_t s = 0; s < grid->cells_.size(); ++s) {
        if (component[s] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        sizes.push_back(0);
        std::queue<std::size_t> q;
        q.push(s);
        component[s] = id;
        while (!q.empty()) {
            const auto k = q.front();
            q.pop();
            ++sizes.back();
            const auto& c = grid->cells_[k];
            for (auto [di, dj] : kNeighbors) {
                const auto nb = grid->index(c.i + di, c.j + dj);
                if (nb == Grid::inactive) continue;
                const double ap = di + dj > 0 ? grid->east_or_north(c.i, c.j, di == 1)
                                              : grid->east_or_north(c.i + di, c.j + dj, di == -1);
                if (ap > 0.0 && component[nb] < 0) {
                    component[nb] = id;
                    q.push(static_cast<std::size_t>(nb));
                }
            }
        }
    }
    if (sizes.size() > 1) {
        std::ostringstream os;
        os << "active cells form " << sizes.size() << " disconnected components:";
        std::vector<bool> seen(sizes.size(), false);
        for (std::size_t k = 0; k < component.size(); ++k) {
            const int id = component[k];
            if (seen[id]) continue;
            seen[id] = true;
            os << " #" << id << " (" << sizes[id] << " cells, first at " << grid->cells_[k].position.x << ","
               << grid->cells_[k].position.y << ")";
        }
        throw InvalidInput(os.str());
    }
    return grid;
}

GridField::GridField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw InvalidInput("grid field without a grid");
    if (values.size() != grid->active_count()) throw InvalidInput("grid field length does not match active cells");
    for (double x : values)
        if (!std::isfinite(x)) throw InvalidInput("grid field has non-finite values");
}

SparseOperator assemble_neumann_laplacian(const Grid& grid) {
    const double inv_h2 = 1.0 / grid.cell_area();
    std::vector<SparseOperator::Entry> entries;
    entries.reserve(grid.active_count() * 5);
    for (std::size_t k = 0; k < grid.active_count(); ++k) {
        const auto& c = grid.cell(k);
        double diag = 0.0;
        for (auto [di, dj] : kNeighbors) {
            const auto nb = grid.index(c.i + di, c.j + dj);
            if (nb == Grid::inactive) continue;
            const double ap = di + dj > 0 ? grid.east_or_north(c.i, c.j, di == 1)
                                          : grid.east_or_north(c.i + di, c.j + dj, di == -1);
            if (ap == 0.0) continue;
            diag += ap * inv_h2;
            entries.push_back({k, static_cast<std::size_t>(nb), -ap * inv_h2});
        }
        entries.push_back({k, k, diag});
    }
    return SparseOperator(grid.active_count(), std::move(entries));
}

double dirichlet_energy(const Grid& grid, std::span<const double> psi) {
    if (psi.size() != grid.active_count()) throw InvalidInput("field length does not match grid");
    double e = 0.0;
    for (std::size_t k = 0; k < grid.active_count(); ++k) {
        const auto& c = grid.cell(k);
        // East and north neighbours visit every edge once.
        for (auto [di, dj] : {std::array<int, 2>{1, 0}, std::array<int, 2>{0, 1}}) {
            const auto nb = grid.index(c.i + di, c.j + dj);
            if (nb == Grid::inactive) continue;
            const double d = psi[k] - psi[static_cast<std::size_t>(nb)];
            e += grid.east_or_north(c.i, c.j, di == 1) * d * d;
        }
    }
    return e;
}

namespace {

Interpolated affine_fit(const GridField& field, int i0, int j0, Vec2 p) {
    const Grid& g = *field.grid;
    struct Sample {
        double dx, dy, v;
    };
    std::vector<Sample> samples;
    for (int j = j0 - 1; j <= j0 + 2; ++j) {
        for (int i = i0 - 1; i <= i0 + 2; ++i) {
            const auto k = g.index(i, j);
            if (k == Grid::inactive) continue;
            const Vec2 c = g.center(i, j);
            samples.push_back({(c.x - p.x) / g.spacing(), (c.y - p.y) / g.spacing(), field.values[k]});
        }
    }
    if (samples.empty()) {
        std::ostringstream os;
        os << "no active cells near point (" << p.x << "," << p.y << ")";
        throw InvalidInput(os.str());
    }
    // Normal equations for v ~ a + b dx + c dy in coordinates centred at p (value at p is a).
    double m[3][3] = {};
    double rhs[3] = {};
    for (const auto& s : samples) {
        const double phi[3] = {1.0, s.dx, s.dy};
        for (int r = 0; r < 3; ++r) {
            rhs[r] += phi[r] * s.v;
            for (int c = 0; c < 3; ++c) m[r][c] += phi[r] * phi[c];
        }
    }
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (samples.size() < 3 || std::abs(det) < 1e-10 * std::pow(static_cast<double>(samples.size()), 3)) {
        // Degenerate layout: nearest active value.
        double best = std::numeric_limits<double>::infinity();
        double v = 0.0;
        for (const auto& s : samples) {
            const double d = s.dx * s.dx + s.dy * s.dy;
            if (d < best) {
                best = d;
                v = s.v;
            }
        }
        return {v, true};
    }
    // Cramer's rule for the constant coefficient.
    const double det0 = rhs[0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                        m[0][1] * (rhs[1] * m[2][2] - m[1][2] * rhs[2]) +
                        m[0][2] * (rhs[1] * m[2][1] - m[1][1] * rhs[2]);
    return {det0 / det, true};
}

} // namespace

Interpolated interpolate(const GridField& field, Vec2 p) {
    const Grid& g = *field.grid;
    const double fx = (p.x - g.origin().x) / g.spacing() - 0.5;
    const double fy = (p.y - g.origin().y) / g.spacing() - 0.5;
    const int i0 = static_cast<int>(std::floor(fx));
    const int j0 = static_cast<int>(std::floor(fy));
    const double tx = fx - i0;
    const double ty = fy - j0;
    const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    const int di[4] = {0, 1, 0, 1};
    const int dj[4] = {0, 0, 1, 1};
    double v = 0.0;
    for (int s = 0; s < 4; ++s) {
        if (w[s] == 0.0) continue;
        const auto k = g.index(i0 + di[s], j0 + dj[s]);
        if (k == Grid::inactive) return affine_fit(field, i0, j0, p);
        v += w[s] * field.values[k];
    }
    return {v, false};
}

InterpolatedGradient interpolate_gradient(const GridField& field, Vec2 p) {
    const double half = 0.5 * field.grid->spacing();
    const auto xp = interpolate(field, p + Vec2{half, 0});
    const auto xm = interpolate(field, p - Vec2{half, 0});
    const auto yp = interpolate(field, p + Vec2{0, half});
    const auto ym = interpolate(field, p - Vec2{0, half});
    const double inv = 1.0 / (2 * half);
    return {{(xp.value - xm.value) * inv, (yp.value - ym.value) * inv},
            xp.extrapolated || xm.extrapolated || yp.extrapolated || ym.extrapolated};
}

} // namespace critreg
