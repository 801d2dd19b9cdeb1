#ifndef HFCE_GRID_REFINE_HPP
#define HFCE_GRID_REFINE_HPP

#include <iosfwd>

#include "hfce/dictionary.hpp"
#include "hfce/types.hpp"

namespace hfce {

struct RefineOptions {
    int sweeps = 1;
    double armijo = 1e-4;
    double shrink = 0.5;
    int max_halvings = 30;
};

struct MlGradient {
    RealVector d_angle;     // Qbar, zero off the active columns
    RealVector d_range;     // Qbar
    RealVector d_bs_angle;  // M
};

/// Likelihood objective L = -sum_p ||y_p - F_p (Q_V kron F_M) x||^2 at the
/// given off-grid state (higher is better, 0 is a perfect noiseless fit).
double ml_objective(const ComplexVector& y, const ComplexMatrix& ris_phases,
                    const DictionarySet& dict, const IntMatrix& phi_s, const ComplexVector& x,
                    const OffGridState& xi);

/// Analytical gradient of ml_objective via the closed-form ARV derivatives.
/// Entries for inactive columns (zero x block) are exactly zero.
MlGradient ml_gradient(const ComplexVector& y, const ComplexMatrix& ris_phases,
                       const DictionarySet& dict, const IntMatrix& phi_s, const ComplexVector& x,
                       const OffGridState& xi);

/// One (or more) sequential ascent sweeps: compressed angles, then ranges
/// with the new angles, then BS angles. Each family takes one backtracked
/// gradient step; accumulated offsets are clamped to half a grid cell and the
/// objective never decreases. Appends (sweep, L, |grad|, step) rows to
/// `trace` when non-null.
OffGridState refine(const ComplexVector& y, const ComplexMatrix& ris_phases,
                    const DictionarySet& dict, const IntMatrix& phi_s, const ComplexVector& x,
                    OffGridState xi, const RefineOptions& opts = {}, std::ostream* trace = nullptr);

}  // namespace hfce

#endif
