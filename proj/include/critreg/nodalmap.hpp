#pragma once

#include "critreg/linalg.hpp"

#include <iosfwd>
#include <vector>

namespace critreg {

/// f = mu psi^2 - |grad psi|^2 per active cell. Cells whose gradient stencil leaves the
/// domain (not all eight neighbours active, or an extrapolated sample) are flagged.
struct SmallHoleObjective {
    GridField f;
    std::vector<bool> boundary_adjacent;
};

SmallHoleObjective small_hole_objective(const EigenPair& pair);

/// Representative of the mu2 eigenspace: the combination best aligned with the x coordinate
/// when the eigenvalue is degenerate, the eigenvector itself otherwise. Sign-fixed.
EigenPair x_aligned_branch(const OracleResult& oracle);

struct NodalSet {
    std::vector<Vec2> crossings;               // zero crossings on grid edges
    std::vector<std::vector<Vec2>> polylines;  // marching-squares segments chained end to end
    int sign_regions = 0;                      // 4-connected components of constant sign

    /// Distance from p to the nearest polyline segment or crossing.
    [[nodiscard]] double distance(Vec2 p) const;
};

/// Throws InvalidInput when psi has no sign change.
NodalSet extract_nodal_set(const GridField& psi);

struct FMinimum {
    Vec2 x;
    double f;
    double distance_to_nodal;
};

/// Local minima over the 8-neighbourhood, away from the boundary. Neighbours within
/// rel_tol * max|f| count as ties, so flat valleys (square) report their whole floor
/// rather than whichever cell eigenvector noise happens to favour.
std::vector<FMinimum> locate_f_minima(const SmallHoleObjective& objective, const NodalSet& nodal,
                                      double rel_tol = 1e-6);

struct NodalReport {
    SmallHoleObjective objective;
    NodalSet nodal;
    std::vector<FMinimum> minima;
};

NodalReport nodal_report(const EigenPair& pair);

void write_objective_csv(std::ostream& os, const SmallHoleObjective& objective);
void write_nodal_csv(std::ostream& os, const NodalSet& nodal);
void write_minima_csv(std::ostream& os, const std::vector<FMinimum>& minima);

} // namespace critreg
