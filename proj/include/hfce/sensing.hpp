#ifndef HFCE_SENSING_HPP
#define HFCE_SENSING_HPP

#include <vector>

#include "hfce/dictionary.hpp"
#include "hfce/types.hpp"

namespace hfce {

/// Pilot-stacked sensing operator for the gain model
///   y_p = (eta_p^T kron I_M) ((Q .* Phi_bar) kron F_M) x.
/// Per pilot the operator is c_p^T kron F_M with c_p = (Q .* Phi_bar)^T
/// eta_p, so the Gram matrix factors as C kron (F_M^H F_M) with small
/// C = sum_p conj(c_p) c_p^T. Everything the inference loop needs (matvecs,
/// Gram diagonal, restricted Gram blocks, selected columns) works off these
/// factors; the full M*Qbar Gram matrix is never formed.
class SensingD1 {
public:
    SensingD1(ComplexMatrix bs_dict, ComplexMatrix masked_ris, const ComplexMatrix& ris_phases);

    Eigen::Index rows() const { return m_ * pilots_; }
    Eigen::Index cols() const { return m_ * qbar_; }
    int bs_size() const { return m_; }
    int ris_cols() const { return qbar_; }
    int pilots() const { return pilots_; }

    ComplexVector apply(const ComplexVector& x) const;
    ComplexVector adjoint(const ComplexVector& y) const;
    /// (D1^H D1) x without forming the Gram matrix.
    ComplexVector gram_apply(const ComplexVector& x) const;
    RealVector gram_diag() const;
    /// Restricted Gram block G(S, S) for a small index set.
    ComplexMatrix gram_submatrix(const std::vector<int>& idx) const;
    /// Dense columns for a small index set.
    ComplexMatrix columns(const std::vector<int>& idx) const;
    ComplexMatrix dense() const;

private:
    ComplexMatrix bs_dict_;     // F_M, M x M
    ComplexMatrix masked_ris_;  // Q .* Phi_bar, N x Qbar
    ComplexMatrix coeff_;       // Qbar x P
    ComplexMatrix gram_bs_;     // F_M^H F_M
    ComplexMatrix gram_coeff_;  // sum_p conj(c_p) c_p^T
    int m_ = 0, qbar_ = 0, pilots_ = 0;
};

/// Dense columns of the VR-model operator D2 for the given (subarray k,
/// dictionary column q) pairs, stacked over pilots. Column order matches
/// vec() of the subarray VR matrix restricted to the listed columns: for
/// each listed q, all k = 0..K-1.
ComplexMatrix assemble_d2_columns(const ComplexMatrix& bs_dict, const ComplexMatrix& ris_dict,
                                  const ComplexMatrix& ris_phases, const ComplexVector& x,
                                  int subarrays, const std::vector<int>& columns);

/// Full dense D2 (all K * Qbar columns); test sizes only.
ComplexMatrix assemble_d2_dense(const ComplexMatrix& bs_dict, const ComplexMatrix& ris_dict,
                                const ComplexMatrix& ris_phases, const ComplexVector& x,
                                int subarrays);

}  // namespace hfce

#endif
