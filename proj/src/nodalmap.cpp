#include "critreg/nodalmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace critreg {

SmallHoleObjective small_hole_objective(const EigenPair& pair) {
    const auto& psi = pair.psi;
    const Grid& g = *psi.grid;
    SmallHoleObjective out;
    out.boundary_adjacent.resize(g.active_count());
    std::vector<double> f(g.active_count());
    for (std::size_t k = 0; k < g.active_count(); ++k) {
        const auto grad = interpolate_gradient(psi, g.cell(k).position);
        const double v = psi.values[k];
        f[k] = pair.mu * v * v - dot(grad.gradient, grad.gradient);
        out.boundary_adjacent[k] = grad.extrapolated || !g.interior(k);
    }
    out.f = GridField(psi.grid, std::move(f));
    return out;
}

EigenPair x_aligned_branch(const OracleResult& oracle) {
    EigenPair pair = oracle.pair;
    if (oracle.cluster.size() > 1) {
        const auto& grid = oracle.pair.psi.grid;
        std::vector<double> x;
        x.reserve(grid->active_count());
        for (const auto& c : grid->cells()) x.push_back(c.position.x);
        remove_weighted_mean(x, grid->mass());
        pair.psi = align_in_cluster(oracle.cluster, x);
    }
    pair.psi.values = fix_sign(pair.psi.values);
    return pair;
}

namespace {

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    const double t = len2 > 0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
    return norm(p - (a + t * d));
}

bool positive(double v) { return v >= 0.0; }

// Edge key: lattice cell (i, j) and direction (0 east, 1 north).
using EdgeKey = std::tuple<int, int, int>;

} // namespace

double NodalSet::distance(Vec2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : crossings) best = std::min(best, norm(p - c));
    for (const auto& line : polylines)
        for (std::size_t s = 0; s + 1 < line.size(); ++s) best = std::min(best, segment_distance(p, line[s], line[s + 1]));
    return best;
}

NodalSet extract_nodal_set(const GridField& psi) {
    const Grid& g = *psi.grid;
    auto value = [&](int i, int j) { return psi.values[static_cast<std::size_t>(g.index(i, j))]; };

    NodalSet out;
    std::map<EdgeKey, Vec2> crossing;
    for (const auto& c : g.cells()) {
        for (int dir = 0; dir < 2; ++dir) {
            const int i2 = c.i + (dir == 0), j2 = c.j + (dir == 1);
            if (!g.active(i2, j2)) continue;
            const double a = value(c.i, c.j), b = value(i2, j2);
            if (positive(a) == positive(b)) continue;
            const double t = a / (a - b);
            const Vec2 p = c.position + t * (g.center(i2, j2) - c.position);
            crossing[{c.i, c.j, dir}] = p;
            out.crossings.push_back(p);
        }
    }
    if (crossing.empty()) throw InvalidInput("field has no sign change, so it is not a nontrivial mean-zero eigenvector");

    // Marching squares over blocks of four active centres.
    std::vector<std::pair<EdgeKey, EdgeKey>> segments;
    for (const auto& c : g.cells()) {
        const int i = c.i, j = c.j;
        if (!g.active(i + 1, j) || !g.active(i, j + 1) || !g.active(i + 1, j + 1)) continue;
        // Block edges in counter-clockwise order: bottom, right, top, left.
        const EdgeKey edges[4] = {{i, j, 0}, {i + 1, j, 1}, {i, j + 1, 0}, {i, j, 1}};
        std::vector<int> hit;
        for (int e = 0; e < 4; ++e)
            if (crossing.count(edges[e])) hit.push_back(e);
        if (hit.size() == 2) {
            segments.push_back({edges[hit[0]], edges[hit[1]]});
        } else if (hit.size() == 4) {
            // Saddle: the block average decides which corners connect.
            const double centre = 0.25 * (value(i, j) + value(i + 1, j) + value(i, j + 1) + value(i + 1, j + 1));
            if (positive(centre) == positive(value(i, j))) {
                segments.push_back({edges[0], edges[1]});
                segments.push_back({edges[2], edges[3]});
            } else {
                segments.push_back({edges[0], edges[3]});
                segments.push_back({edges[1], edges[2]});
            }
        }
    }

    // Chain segments sharing crossing points.
    std::multimap<EdgeKey, std::size_t> at;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        at.insert({segments[s].first, s});
        at.insert({segments[s].second, s});
    }
    std::vector<bool> used(segments.size(), false);
    auto extend = [&](std::vector<EdgeKey>& chain) {
        for (;;) {
            bool grown = false;
            auto [lo, hi] = at.equal_range(chain.back());
            for (auto it = lo; it != hi; ++it) {
                if (used[it->second]) continue;
                used[it->second] = true;
                const auto& seg = segments[it->second];
                chain.push_back(seg.first == chain.back() ? seg.second : seg.first);
                grown = true;
                break;
            }
            if (!grown) return;
        }
    };
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        used[s] = true;
        std::vector<EdgeKey> forward{segments[s].first, segments[s].second};
        extend(forward);
        std::vector<EdgeKey> backward{forward.front()};
        extend(backward);
        std::vector<Vec2> line;
        for (auto it = backward.rbegin(); it != backward.rend(); ++it) line.push_back(crossing.at(*it));
        for (std::size_t k = 1; k < forward.size(); ++k) line.push_back(crossing.at(forward[k]));
        out.polylines.push_back(std::move(line));
    }

    // Sign regions by flood fill over active 4-neighbours.
    std::vector<int> label(g.active_count(), -1);
    std::vector<std::size_t> stack;
    for (std::size_t k0 = 0; k0 < g.active_count(); ++k0) {
        if (label[k0] >= 0) continue;
        const bool sign = positive(psi.values[k0]);
        label[k0] = out.sign_regions;
        stack.push_back(k0);
        while (!stack.empty()) {
            const auto k = stack.back();
            stack.pop_back();
            const auto& c = g.cell(k);
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                const auto n = g.index(c.i + di[d], c.j + dj[d]);
                if (n == Grid::inactive) continue;
                const auto nk = static_cast<std::size_t>(n);
                if (label[nk] >= 0 || positive(psi.values[nk]) != sign) continue;
                label[nk] = out.sign_regions;
                stack.push_back(nk);
            }
        }
        ++out.sign_regions;
    }
    return out;
}

std::vector<FMinimum> locate_f_minima(const SmallHoleObjective& objective, const NodalSet& nodal, double rel_tol) {
    const auto& f = objective.f;
    const Grid& g = *f.grid;
    double scale = 0.0;
    for (double v : f.values) scale = std::max(scale, std::abs(v));
    const double tol = rel_tol * scale;

    std::vector<FMinimum> out;
    for (std::size_t k = 0; k < g.active_count(); ++k) {
        if (objective.boundary_adjacent[k]) continue;
        const auto& c = g.cell(k);
        bool minimum = true;
        for (int dj = -1; dj <= 1 && minimum; ++dj)
            for (int di = -1; di <= 1 && minimum; ++di) {
                if (di == 0 && dj == 0) continue;
                const auto n = g.index(c.i + di, c.j + dj);
                if (n != Grid::inactive && f.values[static_cast<std::size_t>(n)] < f.values[k] - tol) minimum = false;
            }
        if (minimum) out.push_back({c.position, f.values[k], nodal.distance(c.position)});
    }
    return out;
}

NodalReport nodal_report(const EigenPair& pair) {
    NodalReport out;
    out.objective = small_hole_objective(pair);
    out.nodal = extract_nodal_set(pair.psi);
    out.minima = locate_f_minima(out.objective, out.nodal);
    return out;
}

void write_objective_csv(std::ostream& os, const SmallHoleObjective& objective) {
    const auto old = os.precision(12);
    os << "x,y,f,boundary_adjacent\n";
    const Grid& g = *objective.f.grid;
    for (std::size_t k = 0; k < g.active_count(); ++k)
        os << g.cell(k).position.x << ',' << g.cell(k).position.y << ',' << objective.f.values[k] << ','
           << (objective.boundary_adjacent[k] ? 1 : 0) << '\n';
    os.precision(old);
}

void write_nodal_csv(std::ostream& os, const NodalSet& nodal) {
    const auto old = os.precision(12);
    os << "polyline,x,y\n";
    for (std::size_t l = 0; l < nodal.polylines.size(); ++l)
        for (const auto& p : nodal.polylines[l]) os << l << ',' << p.x << ',' << p.y << '\n';
    os.precision(old);
}

void write_minima_csv(std::ostream& os, const std::vector<FMinimum>& minima) {
    const auto old = os.precision(12);
    os << "x,y,f,distance_to_nodal\n";
    for (const auto& m : minima) os << m.x.x << ',' << m.x.y << ',' << m.f << ',' << m.distance_to_nodal << '\n';
    os.precision(old);
}

} // namespace critreg
