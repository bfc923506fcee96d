#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace critreg {

/// Raised when an input violates a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine fails (non-convergence, non-finite values, ...).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct BoundingBox {
    Vec2 lo;
    Vec2 hi;
};

struct Disk {
    Vec2 center;
    double radius = 1.0;
};

struct Polygon {
    std::vector<Vec2> vertices; // counterclockwise
};

/// Planar domain: a disk or a simple counterclockwise polygon (possibly non-convex).
class Shape {
public:
    static Shape disk(Vec2 center, double radius);
    static Shape polygon(std::vector<Vec2> vertices);
    static Shape unit_square();

    /// Negative inside, positive outside, zero on the boundary.
    [[nodiscard]] double signed_distance(Vec2 p) const;
    /// Closest point on the boundary.
    [[nodiscard]] Vec2 closest_boundary_point(Vec2 p) const;
    [[nodiscard]] BoundingBox bounding_box() const;
    [[nodiscard]] double area() const;

    [[nodiscard]] bool is_disk() const { return std::holds_alternative<Disk>(geom_); }
    [[nodiscard]] const Disk* as_disk() const { return std::get_if<Disk>(&geom_); }
    [[nodiscard]] const Polygon* as_polygon() const { return std::get_if<Polygon>(&geom_); }

    /// Boundary as a closed polyline (disks are sampled with `segments` points).
    [[nodiscard]] std::vector<Vec2> outline(int segments = 128) const;
    [[nodiscard]] std::string describe() const;

private:
    explicit Shape(std::variant<Disk, Polygon> g) : geom_(std::move(g)) {}
    std::variant<Disk, Polygon> geom_;
};

/// Open ball B_r(x) removed from the domain.
struct Hole {
    Vec2 center;
    double radius = 0.0;

    [[nodiscard]] double area() const { return M_PI * radius * radius; }
    [[nodiscard]] bool contains(Vec2 p) const { return norm(p - center) < radius; }
};

/// Checks r > 0 and dist(center, boundary) > r; throws InvalidInput otherwise.
Hole make_hole(const Shape& shape, Vec2 center, double radius);

struct AdmissibleProjection {
    Vec2 point;
    std::optional<Vec2> normal; // outward unit normal of the eroded set, when on its boundary
    bool ambiguous = false;     // two nearest candidates at equal distance
};

/// Eroded domain {x : dist(x, boundary) > r}; the set of admissible hole centres.
class AdmissibleSet {
public:
    AdmissibleSet(Shape shape, double erosion_radius);

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] double erosion_radius() const { return r_; }

    [[nodiscard]] bool contains(Vec2 x) const { return shape_.signed_distance(x) < -r_; }
    [[nodiscard]] AdmissibleProjection project(Vec2 x) const;

private:
    [[nodiscard]] AdmissibleProjection project_polygon(Vec2 x) const;

    Shape shape_;
    double r_;
};

struct QuadratureNode {
    Vec2 point;
    Vec2 normal; // outward normal of the circle (pointing away from the hole centre)
    double weight;
};

/// Equally spaced midpoint rule on the hole's boundary circle.
std::vector<QuadratureNode> circle_quadrature(const Hole& hole, int m);

} // namespace critreg
