#ifndef HFCE_POLAR_GRID_HPP
#define HFCE_POLAR_GRID_HPP

#include <limits>
#include <vector>

#include "hfce/geometry.hpp"
#include "hfce/types.hpp"

namespace hfce {

/// One dictionary grid point. `curvature` is the quadratic Fresnel phase
/// coefficient zeta = (1 - angle^2) / (2 range); it is the well-conditioned
/// internal coordinate (finite and angle-independent on every ring), while
/// `range` is the derived physical coordinate. Ring 0 is the far-field
/// sentinel: curvature 0, range +inf.
struct GridPoint {
    double angle = 0.0;
    double range = std::numeric_limits<double>::infinity();
    double curvature = 0.0;
};

enum class AngleLayout {
    cell_centered,   // lo + (j + 1/2) span / n; never touches the endpoints
    left_inclusive,  // lo + j span / n; pairs with periodic wrapping
    endpoints,       // lo + j span / (n - 1)
};

struct PolarGridSpec {
    int n_angles = 32;
    int n_rings = 2;          // S, including the far-field ring
    double beta = 1.2;        // coherence control of the radial rule
    double span_lo = -1.0;
    double span_hi = 1.0;
    AngleLayout layout = AngleLayout::cell_centered;
    // At half-wavelength spacing the array response is 2-periodic in the
    // angle coordinate, so angle-difference grids wrap: queries anywhere in
    // [-2, 2] land on the representative inside the span with an exactly
    // identical atom.
    bool periodic = false;
};

/// Angle-major grid: point index = angle_index * n_rings + ring_index,
/// rings ordered far-field first, then strictly decreasing range.
struct PolarGrid {
    std::vector<GridPoint> points;
    PolarGridSpec spec;
    double angle_step = 0.0;
    std::vector<double> ring_curvatures;  // shared by all angles

    int size() const { return static_cast<int>(points.size()); }
    int point_index(int angle_index, int ring_index) const { return angle_index * spec.n_rings + ring_index; }
    int nearest_angle(double angle) const;
    int nearest_ring(double curvature) const;
    int nearest_point(double angle, double curvature) const;
    double angle_half_cell() const { return angle_step / 2.0; }
    /// Half the gap to the closest finite neighbouring ring at this point's
    /// angle; 0 for the far-field ring (its range is pinned).
    double range_half_cell(int point_index) const;
};

/// Radial samples for one angle under the rule r_s = N^2 d^2 (1 - a^2) /
/// (2 beta^2 s lambda), s = 1..S-1, preceded by the far-field ring. An
/// endfire angle (a^2 == 1) collapses to the far-field ring alone.
std::vector<GridPoint> rings_for_angle(const SystemGeometry& geom, double beta, double angle, int n_rings);

PolarGrid build_polar_grid(const SystemGeometry& geom, const PolarGridSpec& spec);

/// Largest |<w_i, w_j>| / N over distinct columns of the ARV dictionary on
/// this grid; recorded by the grid-coherence tests.
double max_column_coherence(const ComplexMatrix& dict);

}  // namespace hfce

#endif
