#include "hfce/polar_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hfce {

namespace {
constexpr double kEndfireGuard = 1e-3;
}

std::vector<GridPoint> rings_for_angle(const SystemGeometry& geom, double beta, double angle, int n_rings) {
    if (beta <= 0.0) throw std::invalid_argument("rings_for_angle: beta must be positive");
    std::vector<GridPoint> out;
    out.reserve(n_rings);
    GridPoint far;
    far.angle = angle;
    out.push_back(far);

    const double one_minus_a2 = 1.0 - angle * angle;
    if (one_minus_a2 == 0.0) return out;  // endfire: only the far-field ring survives

    const double nd = geom.ris_elements * geom.d();
    for (int s = 1; s < n_rings; ++s) {
        GridPoint p;
        p.angle = angle;
        p.range = nd * nd * one_minus_a2 / (2.0 * beta * beta * s * geom.lambda());
        p.curvature = one_minus_a2 / (2.0 * p.range);
        out.push_back(p);
    }
    return out;
}

PolarGrid build_polar_grid(const SystemGeometry& geom, const PolarGridSpec& spec) {
    if (spec.n_angles < 1 || spec.n_rings < 1)
        throw std::invalid_argument("build_polar_grid: bad spec");
    PolarGrid grid;
    grid.spec = spec;

    const double span = spec.span_hi - spec.span_lo;
    grid.angle_step = spec.layout == AngleLayout::endpoints && spec.n_angles > 1
                          ? span / (spec.n_angles - 1)
                          : span / spec.n_angles;

    // Ring curvatures are angle-independent: zeta_s = beta^2 s lambda / (N d)^2.
    const double nd = geom.ris_elements * geom.d();
    grid.ring_curvatures.assign(spec.n_rings, 0.0);
    for (int s = 1; s < spec.n_rings; ++s)
        grid.ring_curvatures[s] = spec.beta * spec.beta * s * geom.lambda() / (nd * nd);

    grid.points.reserve(static_cast<std::size_t>(spec.n_angles) * spec.n_rings);
    const double clip = std::max(std::abs(spec.span_lo), std::abs(spec.span_hi)) - kEndfireGuard;
    for (int i = 0; i < spec.n_angles; ++i) {
        double a = spec.span_lo +
                   grid.angle_step * (spec.layout == AngleLayout::cell_centered ? i + 0.5 : i);
        // Physical grids keep |angle| away from 1 so the angle-difference map
        // of the compression step never divides by zero.
        if (!spec.periodic && std::abs(a) > clip) a = std::copysign(clip, a);
        for (int s = 0; s < spec.n_rings; ++s) {
            GridPoint p;
            p.angle = a;
            p.curvature = grid.ring_curvatures[s];
            p.range = s == 0 ? std::numeric_limits<double>::infinity()
                             : (1.0 - a * a) / (2.0 * p.curvature);
            grid.points.push_back(p);
        }
    }
    return grid;
}

int PolarGrid::nearest_angle(double angle) const {
    const double first = points.front().angle;
    if (spec.n_angles == 1) return 0;
    const long idx = std::lround((angle - first) / angle_step);
    if (spec.periodic) {
        // angle_step * n_angles equals the period, so wrapping is exact.
        const long n = spec.n_angles;
        return static_cast<int>(((idx % n) + n) % n);
    }
    return static_cast<int>(std::clamp<long>(idx, 0, spec.n_angles - 1));
}

int PolarGrid::nearest_ring(double curvature) const {
    int best = 0;
    double best_gap = std::abs(curvature - ring_curvatures[0]);
    for (int s = 1; s < spec.n_rings; ++s) {
        const double gap = std::abs(curvature - ring_curvatures[s]);
        if (gap < best_gap) {
            best_gap = gap;
            best = s;
        }
    }
    return best;
}

int PolarGrid::nearest_point(double angle, double curvature) const {
    return point_index(nearest_angle(angle), nearest_ring(curvature));
}

double PolarGrid::range_half_cell(int point_index) const {
    const int ring = point_index % spec.n_rings;
    if (ring == 0) return 0.0;
    const GridPoint& p = points[point_index];
    double gap = std::numeric_limits<double>::infinity();
    for (int s : {ring - 1, ring + 1}) {
        if (s < 1 || s >= spec.n_rings) continue;
        const double r_other = (1.0 - p.angle * p.angle) / (2.0 * ring_curvatures[s]);
        gap = std::min(gap, std::abs(p.range - r_other));
    }
    if (!std::isfinite(gap)) gap = std::abs(p.range);  // single finite ring
    return gap / 2.0;
}

double max_column_coherence(const ComplexMatrix& dict) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < dict.cols(); ++i)
        for (Eigen::Index j = i + 1; j < dict.cols(); ++j) {
            const double c = std::abs(dict.col(i).dot(dict.col(j))) /
                             (dict.col(i).norm() * dict.col(j).norm());
            worst = std::max(worst, c);
        }
    return worst;
}

}  // namespace hfce
