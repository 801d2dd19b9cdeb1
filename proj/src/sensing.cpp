#include "hfce/sensing.hpp"

#include <stdexcept>

#include "hfce/tensor_ops.hpp"

namespace hfce {

SensingD1::SensingD1(ComplexMatrix bs_dict, ComplexMatrix masked_ris, const ComplexMatrix& ris_phases)
    : bs_dict_(std::move(bs_dict)), masked_ris_(std::move(masked_ris)) {
    m_ = static_cast<int>(bs_dict_.rows());
    qbar_ = static_cast<int>(masked_ris_.cols());
    pilots_ = static_cast<int>(ris_phases.cols());
    if (ris_phases.rows() != masked_ris_.rows())
        throw std::invalid_argument("SensingD1: pilot phase rows must match RIS dictionary rows");
    coeff_ = masked_ris_.transpose() * ris_phases;            // Qbar x P
    gram_bs_ = bs_dict_.adjoint() * bs_dict_;                 // M x M
    gram_coeff_ = coeff_.conjugate() * coeff_.transpose();    // Qbar x Qbar
}

ComplexVector SensingD1::apply(const ComplexVector& x) const {
    if (x.size() != cols()) throw std::invalid_argument("SensingD1::apply: size mismatch");
    const ComplexMatrix xm = unvec(x, m_, qbar_);
    ComplexVector y(rows());
    const ComplexMatrix fx = bs_dict_ * xm;  // M x Qbar
    for (int p = 0; p < pilots_; ++p) y.segment(p * m_, m_) = fx * coeff_.col(p);
    return y;
}

ComplexVector SensingD1::adjoint(const ComplexVector& y) const {
    if (y.size() != rows()) throw std::invalid_argument("SensingD1::adjoint: size mismatch");
    ComplexMatrix z = ComplexMatrix::Zero(m_, qbar_);
    for (int p = 0; p < pilots_; ++p)
        z.noalias() += (bs_dict_.adjoint() * y.segment(p * m_, m_)) * coeff_.col(p).adjoint();
    return vec(z);
}

ComplexVector SensingD1::gram_apply(const ComplexVector& x) const {
    const ComplexMatrix xm = unvec(x, m_, qbar_);
    return vec((gram_bs_ * xm * gram_coeff_.transpose()).eval());
}

RealVector SensingD1::gram_diag() const {
    RealVector diag(cols());
    for (int q = 0; q < qbar_; ++q)
        for (int i = 0; i < m_; ++i)
            diag(q * m_ + i) = gram_coeff_(q, q).real() * gram_bs_(i, i).real();
    return diag;
}

ComplexMatrix SensingD1::gram_submatrix(const std::vector<int>& idx) const {
    const int s = static_cast<int>(idx.size());
    ComplexMatrix g(s, s);
    for (int a = 0; a < s; ++a) {
        const int qa = idx[a] / m_, ma = idx[a] % m_;
        for (int b = 0; b < s; ++b) {
            const int qb = idx[b] / m_, mb = idx[b] % m_;
            g(a, b) = gram_coeff_(qa, qb) * gram_bs_(ma, mb);
        }
    }
    return g;
}

ComplexMatrix SensingD1::columns(const std::vector<int>& idx) const {
    ComplexMatrix out(rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const int q = idx[j] / m_, mi = idx[j] % m_;
        for (int p = 0; p < pilots_; ++p)
            out.col(j).segment(p * m_, m_) = coeff_(q, p) * bs_dict_.col(mi);
    }
    return out;
}

ComplexMatrix SensingD1::dense() const {
    if (cols() > 4096) throw std::invalid_argument("SensingD1::dense: operator too large");
    std::vector<int> all(cols());
    for (int i = 0; i < cols(); ++i) all[i] = i;
    return columns(all);
}

ComplexMatrix assemble_d2_columns(const ComplexMatrix& bs_dict, const ComplexMatrix& ris_dict,
                                  const ComplexMatrix& ris_phases, const ComplexVector& x,
                                  int subarrays, const std::vector<int>& columns) {
    const int m = static_cast<int>(bs_dict.rows());
    const int n = static_cast<int>(ris_dict.rows());
    const int pilots = static_cast<int>(ris_phases.cols());
    if (n % subarrays != 0) throw std::invalid_argument("assemble_d2_columns: bad subarray count");
    const int rep = n / subarrays;

    ComplexMatrix out(m * pilots, static_cast<Eigen::Index>(columns.size()) * subarrays);
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const int q = columns[j];
        const ComplexVector gq = bs_dict * x.segment(q * m, m);  // F_M x_q
        for (int k = 0; k < subarrays; ++k) {
            // Per pilot the column is (eta_p restricted to subarray k)^T q_q
            // times F_M x_q; linearity in the subarray VR entry.
            for (int p = 0; p < pilots; ++p) {
                const Complex c = ris_phases.col(p)
                                      .segment(k * rep, rep)
                                      .cwiseProduct(ris_dict.col(q).segment(k * rep, rep))
                                      .sum();
                out.col(j * subarrays + k).segment(p * m, m) = c * gq;
            }
        }
    }
    return out;
}

ComplexMatrix assemble_d2_dense(const ComplexMatrix& bs_dict, const ComplexMatrix& ris_dict,
                                const ComplexMatrix& ris_phases, const ComplexVector& x,
                                int subarrays) {
    std::vector<int> all(ris_dict.cols());
    for (std::size_t q = 0; q < all.size(); ++q) all[q] = static_cast<int>(q);
    return assemble_d2_columns(bs_dict, ris_dict, ris_phases, x, subarrays, all);
}

}  // namespace hfce
