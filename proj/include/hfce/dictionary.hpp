#ifndef HFCE_DICTIONARY_HPP
#define HFCE_DICTIONARY_HPP

#include <vector>

#include "hfce/geometry.hpp"
#include "hfce/polar_grid.hpp"
#include "hfce/types.hpp"

namespace hfce {

/// Continuous perturbations of the dictionary grids. Entries are nonzero
/// only at indices currently active in the sparse estimate and stay within
/// half a grid cell of their base point.
struct OffGridState {
    RealVector delta_bs_angle;  // M
    RealVector delta_angle;     // Qbar, compressed-grid angle offsets
    RealVector delta_range;     // Qbar, compressed-grid range offsets

    bool is_zero() const {
        return delta_bs_angle.isZero(0.0) && delta_angle.isZero(0.0) && delta_range.isZero(0.0);
    }
    static OffGridState zeros(int m, int qbar) {
        OffGridState s;
        s.delta_bs_angle = RealVector::Zero(m);
        s.delta_angle = RealVector::Zero(qbar);
        s.delta_range = RealVector::Zero(qbar);
        return s;
    }
};

struct DictionaryOptions {
    PolarGridSpec polar;       // user-side grid over [-1, 1]
    PolarGridSpec compressed;  // angle-difference grid over [-2, 2]

    /// n_angles = q_bar / rings for both grids, compressed span [-2, 2].
    static DictionaryOptions for_geometry(const SystemGeometry& geom, int q_bar, int rings,
                                          double beta = 1.2);
    /// Compressed grid aligned with the angle differences of the far-field
    /// grids (spacing 2/N, endpoints inclusive); used by the equivalence
    /// tests where exact on-grid re-indexing is required.
    static DictionaryOptions aligned_for_geometry(const SystemGeometry& geom, int rings,
                                                  double beta = 1.2);
};

/// All sparse-representation machinery for one geometry: far-field BS/RIS
/// dictionaries on the uniform cosine grids, the user-side polar dictionary,
/// and the compressed angle-difference dictionary of the cascaded model.
struct DictionarySet {
    SystemGeometry geom;
    std::vector<double> bs_angles;   // M grid cosines
    std::vector<double> ris_angles;  // N grid cosines
    ComplexMatrix bs_dict;           // F_M, M x M
    ComplexMatrix ris_dict;          // F_N, N x N
    PolarGrid polar;
    ComplexMatrix near_dict;         // W, N x Nbar
    PolarGrid comp;
    ComplexMatrix comp_dict;         // Q, N x Qbar
    IntMatrix pair_to_point;         // Nbar x N -> compressed column index

    int m() const { return geom.bs_antennas; }
    int n() const { return geom.ris_elements; }
    int n_bar() const { return static_cast<int>(near_dict.cols()); }
    int q_bar() const { return static_cast<int>(comp_dict.cols()); }

    static DictionarySet build(const SystemGeometry& geom, const DictionaryOptions& opts);

    /// Column-wise rebuilds at perturbed continuous parameters; columns with
    /// zero offsets are bitwise the base columns.
    ComplexMatrix perturbed_bs_dict(const OffGridState& xi) const;
    ComplexMatrix perturbed_comp_dict(const OffGridState& xi) const;

    ComplexVector comp_column(int q, const OffGridState& xi) const;
    ComplexVector bs_column(int m_idx, const OffGridState& xi) const;

    /// Closed-form ARV derivatives with respect to the off-grid parameters,
    /// evaluated at the perturbed point.
    ComplexVector comp_column_dangle(int q, const OffGridState& xi) const;
    ComplexVector comp_column_drange(int q, const OffGridState& xi) const;
    ComplexVector bs_column_dangle(int m_idx, const OffGridState& xi) const;

    /// A column is range-refinable when its base point is a finite ring away
    /// from the r = 0 degeneracy of the (angle, range) parameterization.
    bool range_refinable(int q) const;

    double bs_half_cell() const { return 1.0 / geom.bs_antennas; }  // grid step 2/M

    /// Map a continuous (bs angle, compressed angle, curvature) triple to the
    /// nearest dictionary indices.
    int nearest_bs_index(double vartheta) const;
    int nearest_comp_index(double angle_diff, double curvature) const;
};

/// Element-level mask from a subarray-level one: phi = phi_sub kron ones(N/K).
IntMatrix expand_mask(const IntMatrix& phi_sub, int elements_per_subarray);

/// Mask a dictionary with an element-level VR matrix.
ComplexMatrix apply_mask(const ComplexMatrix& dict, const IntMatrix& phi);

}  // namespace hfce

#endif
