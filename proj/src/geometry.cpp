#include "critreg/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace critreg {

namespace {

struct SegmentHit {
    double distance;
    Vec2 point;
};

SegmentHit closest_on_segment(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q = a + t * ab;
    return {norm(p - q), q};
}

// Even-odd crossing test; boundary handling is left to the caller.
bool crossing_inside(const std::vector<Vec2>& v, Vec2 p) {
    bool inside = false;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = v[i];
        const Vec2 b = v[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xc) inside = !inside;
        }
    }
    return inside;
}

double signed_area(const std::vector<Vec2>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += cross(v[i], v[(i + 1) % v.size()]);
    return 0.5 * s;
}

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
        const double o = cross(b - a, c - a);
        return (o > 0.0) - (o < 0.0);
    };
    auto on_seg = [](Vec2 a, Vec2 b, Vec2 c) {
        return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
               c.y <= std::max(a.y, b.y);
    };
    const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_seg(p1, p2, q1)) return true;
    if (o2 == 0 && on_seg(p1, p2, q2)) return true;
    if (o3 == 0 && on_seg(q1, q2, p1)) return true;
    if (o4 == 0 && on_seg(q1, q2, p2)) return true;
    return false;
}

bool lex_less(Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

} // namespace

Shape Shape::disk(Vec2 center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidInput("disk radius must be positive");
    return Shape(Disk{center, radius});
}

Shape Shape::polygon(std::vector<Vec2> vertices) {
    const std::size_t n = vertices.size();
    if (n < 3) throw InvalidInput("polygon needs at least 3 vertices");
    for (auto v : vertices)
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw InvalidInput("polygon vertex is not finite");
    if (!(signed_area(vertices) > 0.0)) throw InvalidInput("polygon must be counterclockwise with positive area");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if (adjacent) continue;
            if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]))
                throw InvalidInput("polygon is self-intersecting");
        }
    }
    return Shape(Polygon{std::move(vertices)});
}

Shape Shape::unit_square() { return polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

double Shape::signed_distance(Vec2 p) const {
    if (const auto* d = as_disk()) return norm(p - d->center) - d->radius;
    const auto& v = as_polygon()->vertices;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i)
        best = std::min(best, closest_on_segment(p, v[i], v[(i + 1) % v.size()]).distance);
    if (best == 0.0) return 0.0;
    return crossing_inside(v, p) ? -best : best;
}

Vec2 Shape::closest_boundary_point(Vec2 p) const {
    if (const auto* d = as_disk()) {
        const Vec2 off = p - d->center;
        const double rho = norm(off);
        if (rho == 0.0) return d->center + Vec2{d->radius, 0.0};
        return d->center + (d->radius / rho) * off;
    }
    const auto& v = as_polygon()->vertices;
    SegmentHit best{std::numeric_limits<double>::infinity(), {}};
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto hit = closest_on_segment(p, v[i], v[(i + 1) % v.size()]);
        if (hit.distance < best.distance) best = hit;
    }
    return best.point;
}

BoundingBox Shape::bounding_box() const {
    if (const auto* d = as_disk())
        return {{d->center.x - d->radius, d->center.y - d->radius}, {d->center.x + d->radius, d->center.y + d->radius}};
    const auto& v = as_polygon()->vertices;
    BoundingBox box{v.front(), v.front()};
    for (auto p : v) {
        box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
        box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
    }
    return box;
}

double Shape::area() const {
    if (const auto* d = as_disk()) return M_PI * d->radius * d->radius;
    return signed_area(as_polygon()->vertices);
}

std::vector<Vec2> Shape::outline(int segments) const {
    if (const auto* d = as_disk()) {
        std::vector<Vec2> pts;
        pts.reserve(segments);
        for (int k = 0; k < segments; ++k) {
            const double t = 2.0 * M_PI * k / segments;
            pts.push_back(d->center + d->radius * Vec2{std::cos(t), std::sin(t)});
        }
        return pts;
    }
    return as_polygon()->vertices;
}

std::string Shape::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (const auto* d = as_disk()) {
        os << "disk(" << d->center.x << "," << d->center.y << "," << d->radius << ")";
    } else {
        os << "polygon(";
        const auto& v = as_polygon()->vertices;
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i].x << "," << v[i].y;
        os << ")";
    }
    return os.str();
}

Hole make_hole(const Shape& shape, Vec2 center, double radius) {
    if (!(radius > 0.0)) throw InvalidInput("hole radius must be positive");
    if (!(shape.signed_distance(center) < -radius))
        throw InvalidInput("hole B_r(x) is not contained in the domain (need dist(x, boundary) > r)");
    return Hole{center, radius};
}

AdmissibleSet::AdmissibleSet(Shape shape, double erosion_radius) : shape_(std::move(shape)), r_(erosion_radius) {
    if (!(r_ > 0.0)) throw InvalidInput("erosion radius must be positive");
    if (const auto* d = shape_.as_disk(); d && d->radius <= r_)
        throw InvalidInput("erosion radius leaves no admissible centres");
}

AdmissibleProjection AdmissibleSet::project(Vec2 x) const {
    if (contains(x)) return {x, std::nullopt, false};
    if (const auto* d = shape_.as_disk()) {
        const Vec2 off = x - d->center;
        const double rho = norm(off);
        const Vec2 n = (1.0 / rho) * off;
        const double rho_max = d->radius - r_;
        if (rho == rho_max) return {x, n, false};
        return {d->center + rho_max * n, n, false};
    }
    return project_polygon(x);
}

AdmissibleProjection AdmissibleSet::project_polygon(Vec2 x) const {
    const auto& v = shape_.as_polygon()->vertices;
    const std::size_t n = v.size();

    struct Line {
        Vec2 a, b;
    };
    std::vector<Line> offsets;
    offsets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[i], b = v[(i + 1) % n];
        const Vec2 d = (1.0 / norm(b - a)) * (b - a);
        const Vec2 inward{-d.y, d.x};
        offsets.push_back({a + r_ * inward, b + r_ * inward});
    }

    std::vector<Vec2> cand;
    for (const auto& s : offsets) {
        cand.push_back(closest_on_segment(x, s.a, s.b).point);
        cand.push_back(s.a);
        cand.push_back(s.b);
    }
    for (auto c : v) {
        const Vec2 off = x - c;
        const double rho = norm(off);
        if (rho > 0.0) cand.push_back(c + (r_ / rho) * off);
    }
    // Corners of the eroded set: pairwise intersections of offset edges and vertex circles.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2 p = offsets[i].a, dp = offsets[i].b - offsets[i].a;
            const Vec2 q = offsets[j].a, dq = offsets[j].b - offsets[j].a;
            const double den = cross(dp, dq);
            if (std::abs(den) < 1e-14 * norm(dp) * norm(dq)) continue;
            const double t = cross(q - p, dq) / den;
            const double u = cross(q - p, dp) / den;
            if (t >= -1e-12 && t <= 1 + 1e-12 && u >= -1e-12 && u <= 1 + 1e-12) cand.push_back(p + t * dp);
        }
        for (auto c : v) {
            const Vec2 p = offsets[i].a, dp = offsets[i].b - offsets[i].a;
            const double A = dot(dp, dp), B = 2 * dot(dp, p - c), C = dot(p - c, p - c) - r_ * r_;
            const double disc = B * B - 4 * A * C;
            if (disc < 0) continue;
            for (double sgn : {-1.0, 1.0}) {
                const double t = (-B + sgn * std::sqrt(disc)) / (2 * A);
                if (t >= -1e-12 && t <= 1 + 1e-12) cand.push_back(p + t * dp);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Vec2 d = v[j] - v[i];
            const double dist = norm(d);
            if (dist == 0.0 || dist > 2 * r_) continue;
            const Vec2 mid = v[i] + 0.5 * d;
            const double half = std::sqrt(std::max(0.0, r_ * r_ - 0.25 * dist * dist));
            const Vec2 perp{-d.y / dist, d.x / dist};
            cand.push_back(mid + half * perp);
            cand.push_back(mid - half * perp);
        }
    }

    const auto box = shape_.bounding_box();
    const double scale = std::max(norm(box.hi - box.lo), 1.0);
    const double feas_tol = 1e-9 * scale;

    Vec2 best{};
    double best_d = std::numeric_limits<double>::infinity();
    bool ambiguous = false;
    for (auto c : cand) {
        const double sd = shape_.signed_distance(c);
        if (sd > -r_ + feas_tol || sd >= 0.0) continue;
        const double dd = norm(c - x);
        if (dd < best_d - 1e-12 * scale) {
            best = c;
            best_d = dd;
            ambiguous = false;
        } else if (dd <= best_d + 1e-12 * scale) {
            if (norm(c - best) > 1e-9 * scale) {
                ambiguous = true;
                if (lex_less(c, best)) best = c;
            }
        }
    }
    if (!std::isfinite(best_d)) throw InvalidInput("admissible set is empty for this erosion radius");

    Vec2 normal;
    if (best_d > 1e-14 * scale) {
        normal = (1.0 / best_d) * (x - best);
    } else {
        const Vec2 q = shape_.closest_boundary_point(best);
        normal = (1.0 / norm(q - best)) * (q - best);
    }
    return {best, normal, ambiguous};
}

std::vector<QuadratureNode> circle_quadrature(const Hole& hole, int m) {
    if (m < 4) throw InvalidInput("circle quadrature needs at least 4 nodes");
    if (!(hole.radius > 0.0)) throw InvalidInput("hole radius must be positive");
    std::vector<QuadratureNode> nodes;
    nodes.reserve(m);
    const double w = 2.0 * M_PI * hole.radius / m;
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * M_PI * k / m;
        const Vec2 n{std::cos(t), std::sin(t)};
        nodes.push_back({hole.center + hole.radius * n, n, w});
    }
    return nodes;
}

} // namespace critreg
