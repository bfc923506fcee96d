#pragma once

#include "critreg/geometry.hpp"
#include "critreg/sparse.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace critreg {

/// Masked uniform cell-centred grid over a domain minus an optional hole.
///
/// The outer boundary is a staircase: a cell is inside when its centre is. The hole is a
/// smoothed indicator of width h: a cell carries the material fraction
/// H((|c - x| - r)/h) at its centre and a face the fraction at its midpoint, with
/// H(s) = (1 + erf(s))/2. The discrete problem then depends smoothly on the hole centre.
/// Cells with a fraction below `min_fraction` are dropped.
///
/// The lattice depends only on the shape and the spacing, so grids built for
/// different hole positions on the same shape share cell indices (i, j).
class Grid {
public:
    static constexpr std::int64_t inactive = -1;
    static constexpr double min_fraction = 1e-3;

    [[nodiscard]] double spacing() const { return h_; }
    [[nodiscard]] double cell_area() const { return h_ * h_; }
    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int ny() const { return ny_; }
    [[nodiscard]] Vec2 origin() const { return origin_; }
    [[nodiscard]] std::size_t active_count() const { return cells_.size(); }
    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] const std::optional<Hole>& hole() const { return hole_; }

    [[nodiscard]] Vec2 center(int i, int j) const {
        return {origin_.x + (i + 0.5) * h_, origin_.y + (j + 0.5) * h_};
    }
    [[nodiscard]] bool in_lattice(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }
    /// Compact row index of lattice cell (i, j), or `inactive`.
    [[nodiscard]] std::int64_t index(int i, int j) const {
        return in_lattice(i, j) ? index_[static_cast<std::size_t>(j) * nx_ + i] : inactive;
    }
    [[nodiscard]] bool active(int i, int j) const { return index(i, j) != inactive; }

    struct Cell {
        int i;
        int j;
        Vec2 position;
    };
    [[nodiscard]] const std::vector<Cell>& cells() const { return cells_; }
    [[nodiscard]] const Cell& cell(std::size_t k) const { return cells_[k]; }

    /// Material fraction of active cell k (1 away from the hole).
    [[nodiscard]] double area_fraction(std::size_t k) const { return fraction_[k]; }
    /// Mass weights h^2 * fraction, the diagonal of the cell-area inner product.
    [[nodiscard]] const std::vector<double>& mass() const { return mass_; }
    [[nodiscard]] double total_area() const;
    /// Material fraction of the face between (i, j) and (i+1, j) / (i, j+1).
    [[nodiscard]] double east_aperture(int i, int j) const { return face_fraction(i, j, 0); }
    [[nodiscard]] double north_aperture(int i, int j) const { return face_fraction(i, j, 1); }
    [[nodiscard]] double east_or_north(int i, int j, bool east) const { return face_fraction(i, j, east ? 0 : 1); }

    /// Number of active 4-neighbours of active cell k.
    [[nodiscard]] int active_neighbors(std::size_t k) const;
    /// True when all eight surrounding lattice cells are active.
    [[nodiscard]] bool interior(std::size_t k) const;

private:
    friend std::shared_ptr<const Grid> build_grid(const Shape&, const std::optional<Hole>&, double);

    Grid(Shape shape, std::optional<Hole> hole) : shape_(std::move(shape)), hole_(std::move(hole)) {}
    [[nodiscard]] double face_fraction(int i, int j, int dir) const;
    [[nodiscard]] double hole_fraction(Vec2 p) const;

    Shape shape_;
    std::optional<Hole> hole_;
    double h_ = 0.0;
    int nx_ = 0;
    int ny_ = 0;
    Vec2 origin_;
    std::vector<std::int64_t> index_;
    std::vector<Cell> cells_;
    std::vector<double> fraction_;
    std::vector<double> mass_;
};


using GridPtr = std::shared_ptr<const Grid>;

/// Builds the active-cell mask: centres strictly inside the shape and strictly outside the hole.
/// Throws InvalidInput for an under-resolved or misplaced hole and for a disconnected mask.
GridPtr build_grid(const Shape& shape, const std::optional<Hole>& hole, double h);

/// One scalar per active cell of a grid.
struct GridField {
    GridPtr grid;
    std::vector<double> values;

    GridField() = default;
    GridField(GridPtr g, std::vector<double> v);
    static GridField sample(GridPtr g, auto&& fn) {
        std::vector<double> v;
        v.reserve(g->active_count());
        for (const auto& c : g->cells()) v.push_back(fn(c.position));
        return GridField(std::move(g), std::move(v));
    }
};

/// 5-point Neumann stiffness matrix K (discrete -Laplace times the cell mass).
/// Off-diagonal = -(face fraction)/h^2 for each active 4-neighbour, diagonal = minus the
/// row's off-diagonal sum; missing fluxes are dropped. Away from the hole every face is 1,
/// so K is the plain grid-graph Laplacian scaled by 1/h^2 and the eigenproblem
/// K psi = mu M psi (M = mass / h^2) reduces to A psi = mu psi.
SparseOperator assemble_neumann_laplacian(const Grid& grid);

/// Discrete Dirichlet energy h^2 * psi^T K psi, summed edge-wise as sum (face fraction) (psi_i - psi_j)^2.
double dirichlet_energy(const Grid& grid, std::span<const double> psi);

struct Interpolated {
    double value = 0.0;
    bool extrapolated = false;
};

struct InterpolatedGradient {
    Vec2 gradient;
    bool extrapolated = false;
};

/// Bilinear interpolation from the four surrounding cell centres. When one of them is
/// inactive, falls back to a least-squares affine fit over the active cells of the
/// surrounding 4x4 block and raises the `extrapolated` flag. Throws if nothing is nearby.
Interpolated interpolate(const GridField& field, Vec2 p);

/// Central difference of interpolated values at p +- h/2 along each axis.
InterpolatedGradient interpolate_gradient(const GridField& field, Vec2 p);

} // namespace critreg
