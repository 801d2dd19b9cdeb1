#include "hfce/dictionary.hpp"

#include <cmath>
#include <stdexcept>

namespace hfce {

namespace {
constexpr double kRangeGuard = 1e-9;

// Curvature of a column after shifting its (angle, range) coordinates.
double perturbed_curvature(const GridPoint& p, double da, double dr) {
    if (!std::isfinite(p.range)) return 0.0;  // far-field ring: range pinned at infinity
    const double a = p.angle + da;
    return (1.0 - a * a) / (2.0 * (p.range + dr));
}
}  // namespace

DictionaryOptions DictionaryOptions::for_geometry(const SystemGeometry& geom, int q_bar, int rings,
                                                  double beta) {
    if (q_bar % rings != 0) throw std::invalid_argument("dictionary options: rings must divide q_bar");
    DictionaryOptions o;
    o.polar.n_angles = geom.ris_elements;
    o.polar.n_rings = rings;
    o.polar.beta = beta;
    // Angle differences live on [-2, 2] but the atoms are 2-periodic at
    // half-wavelength spacing, so one period carries every distinct atom.
    o.compressed.n_angles = q_bar / rings;
    o.compressed.n_rings = rings;
    o.compressed.beta = beta;
    o.compressed.periodic = true;
    return o;
}

DictionaryOptions DictionaryOptions::aligned_for_geometry(const SystemGeometry& geom, int rings,
                                                          double beta) {
    DictionaryOptions o;
    o.polar.n_angles = geom.ris_elements;
    o.polar.n_rings = rings;
    o.polar.beta = beta;
    // Differences of the two cell-centered far-field grids land on integer
    // multiples of 2/N; the left-inclusive periodic grid contains them all
    // after wrapping.
    o.compressed.n_angles = geom.ris_elements;
    o.compressed.n_rings = rings;
    o.compressed.beta = beta;
    o.compressed.layout = AngleLayout::left_inclusive;
    o.compressed.periodic = true;
    return o;
}

DictionarySet DictionarySet::build(const SystemGeometry& geom, const DictionaryOptions& opts) {
    geom.validate();
    DictionarySet ds;
    ds.geom = geom;
    const int M = geom.bs_antennas;
    const int N = geom.ris_elements;
    const double d = geom.d(), lambda = geom.lambda();

    ds.bs_angles.resize(M);
    ds.bs_dict.resize(M, M);
    for (int m = 0; m < M; ++m) {
        ds.bs_angles[m] = (2.0 / M) * (m + 1 - (M + 1) / 2.0);
        ds.bs_dict.col(m) = far_field_arv(M, ds.bs_angles[m], d, lambda);
    }

    ds.ris_angles.resize(N);
    ds.ris_dict.resize(N, N);
    for (int n = 0; n < N; ++n) {
        ds.ris_angles[n] = (2.0 / N) * (n + 1 - (N + 1) / 2.0);
        ds.ris_dict.col(n) = far_field_arv(N, ds.ris_angles[n], d, lambda);
    }

    PolarGridSpec polar_spec = opts.polar;
    if (polar_spec.span_lo != -1.0 || polar_spec.span_hi != 1.0)
        throw std::invalid_argument("dictionary: polar grid span must be [-1, 1]");
    ds.polar = build_polar_grid(geom, polar_spec);
    ds.near_dict.resize(N, ds.polar.size());
    for (int i = 0; i < ds.polar.size(); ++i) {
        const GridPoint& p = ds.polar.points[i];
        ds.near_dict.col(i) = fresnel_arv(N, p.angle, p.curvature, d, lambda);
    }

    ds.comp = build_polar_grid(geom, opts.compressed);
    ds.comp_dict.resize(N, ds.comp.size());
    for (int q = 0; q < ds.comp.size(); ++q) {
        const GridPoint& p = ds.comp.points[q];
        ds.comp_dict.col(q) = fresnel_arv(N, p.angle, p.curvature, d, lambda);
    }

    // The Appendix-A map: pair (polar point nb, RIS grid column n) has angle
    // difference theta_nb - varphi_n and the curvature of nb's ring.
    ds.pair_to_point.resize(ds.polar.size(), N);
    for (int nb = 0; nb < ds.polar.size(); ++nb) {
        const GridPoint& p = ds.polar.points[nb];
        for (int n = 0; n < N; ++n)
            ds.pair_to_point(nb, n) = ds.comp.nearest_point(p.angle - ds.ris_angles[n], p.curvature);
    }
    return ds;
}

ComplexMatrix DictionarySet::perturbed_bs_dict(const OffGridState& xi) const {
    ComplexMatrix out = bs_dict;
    for (int m_idx = 0; m_idx < m(); ++m_idx)
        if (xi.delta_bs_angle(m_idx) != 0.0) out.col(m_idx) = bs_column(m_idx, xi);
    return out;
}

ComplexMatrix DictionarySet::perturbed_comp_dict(const OffGridState& xi) const {
    ComplexMatrix out = comp_dict;
    for (int q = 0; q < q_bar(); ++q)
        if (xi.delta_angle(q) != 0.0 || xi.delta_range(q) != 0.0) out.col(q) = comp_column(q, xi);
    return out;
}

ComplexVector DictionarySet::comp_column(int q, const OffGridState& xi) const {
    const GridPoint& p = comp.points[q];
    const double da = xi.delta_angle(q), dr = xi.delta_range(q);
    return fresnel_arv(n(), p.angle + da, perturbed_curvature(p, da, dr), geom.d(), geom.lambda());
}

ComplexVector DictionarySet::bs_column(int m_idx, const OffGridState& xi) const {
    return far_field_arv(m(), bs_angles[m_idx] + xi.delta_bs_angle(m_idx), geom.d(), geom.lambda());
}

ComplexVector DictionarySet::comp_column_dangle(int q, const OffGridState& xi) const {
    const GridPoint& p = comp.points[q];
    const double r = std::isfinite(p.range) ? p.range + xi.delta_range(q) : p.range;
    return fresnel_arv_dangle(n(), p.angle + xi.delta_angle(q), r, geom.d(), geom.lambda());
}

ComplexVector DictionarySet::comp_column_drange(int q, const OffGridState& xi) const {
    const GridPoint& p = comp.points[q];
    if (!range_refinable(q)) return ComplexVector::Zero(n());
    return fresnel_arv_drange(n(), p.angle + xi.delta_angle(q), p.range + xi.delta_range(q),
                              geom.d(), geom.lambda());
}

ComplexVector DictionarySet::bs_column_dangle(int m_idx, const OffGridState& xi) const {
    return far_field_arv_dangle(m(), bs_angles[m_idx] + xi.delta_bs_angle(m_idx), geom.d(),
                                geom.lambda());
}

bool DictionarySet::range_refinable(int q) const {
    const GridPoint& p = comp.points[q];
    return std::isfinite(p.range) && std::abs(p.range) > kRangeGuard;
}

int DictionarySet::nearest_bs_index(double vartheta) const {
    int best = 0;
    double gap = std::abs(vartheta - bs_angles[0]);
    for (int m_idx = 1; m_idx < m(); ++m_idx) {
        const double g = std::abs(vartheta - bs_angles[m_idx]);
        if (g < gap) {
            gap = g;
            best = m_idx;
        }
    }
    return best;
}

int DictionarySet::nearest_comp_index(double angle_diff, double curvature) const {
    return comp.nearest_point(angle_diff, curvature);
}

IntMatrix expand_mask(const IntMatrix& phi_sub, int elements_per_subarray) {
    IntMatrix phi(phi_sub.rows() * elements_per_subarray, phi_sub.cols());
    for (Eigen::Index k = 0; k < phi_sub.rows(); ++k)
        for (int i = 0; i < elements_per_subarray; ++i)
            phi.row(k * elements_per_subarray + i) = phi_sub.row(k);
    return phi;
}

ComplexMatrix apply_mask(const ComplexMatrix& dict, const IntMatrix& phi) {
    if (dict.rows() != phi.rows() || dict.cols() != phi.cols())
        throw std::invalid_argument("apply_mask: shape mismatch");
    return dict.cwiseProduct(phi.cast<double>().cast<Complex>());
}

}  // namespace hfce
