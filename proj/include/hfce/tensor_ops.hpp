#ifndef HFCE_TENSOR_OPS_HPP
#define HFCE_TENSOR_OPS_HPP

#include <stdexcept>
#include <vector>

#include "hfce/types.hpp"

// Structured matrix products shared by the dictionary and estimator code:
// Kronecker, column-/row-wise Khatri-Rao, column-major vec/unvec and the
// sparse transform S(A) with vec(B kron A) == S(A) vec(B).
//
// vec() is column-major everywhere; all identities used downstream assume it.

namespace hfce {

template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    using Out = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
    if (ra * rb < 0 || ca * cb < 0) throw std::overflow_error("kron: product shape overflow");
    Out out(ra * rb, ca * cb);
    for (Eigen::Index j = 0; j < ca; ++j)
        for (Eigen::Index i = 0; i < ra; ++i)
            out.block(i * rb, j * cb, rb, cb) = a(i, j) * b.derived();
    return out;
}

/// Column-wise Khatri-Rao: column j of the result is kron(a.col(j), b.col(j)).
template <typename DerivedA, typename DerivedB>
auto khatri_rao_col(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    using Out = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (a.cols() != b.cols()) throw std::invalid_argument("khatri_rao_col: column count mismatch");
    Out out(a.rows() * b.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.col(j).segment(i * b.rows(), b.rows()) = a(i, j) * b.col(j);
    return out;
}

/// Row-wise Khatri-Rao: row i of the result is kron(a.row(i), b.row(i)).
template <typename DerivedA, typename DerivedB>
auto khatri_rao_row(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    using Out = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (a.rows() != b.rows()) throw std::invalid_argument("khatri_rao_row: row count mismatch");
    Out out(a.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.row(i).segment(j * b.cols(), b.cols()) = a(i, j) * b.row(i);
    return out;
}

template <typename Derived>
auto vec(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(a.size());
    for (Eigen::Index j = 0; j < a.cols(); ++j) v.segment(j * a.rows(), a.rows()) = a.col(j);
    return v;
}

template <typename Derived>
auto unvec(const Eigen::MatrixBase<Derived>& v, Eigen::Index rows, Eigen::Index cols) {
    using Scalar = typename Derived::Scalar;
    if (v.size() != rows * cols) throw std::invalid_argument("unvec: length mismatch");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) m.col(j) = v.segment(j * rows, rows);
    return m;
}

/// Sparse transform S(A) with vec(B kron A) == S(A) vec(B) for every
/// rows_b x cols_b matrix B. S(A) has exactly one nonzero per row, so it is
/// kept as a sparse matrix; the dense form is prohibitive at production sizes.
inline SparseComplexMatrix lemma1_transform(const ComplexMatrix& a, Eigen::Index rows_b, Eigen::Index cols_b) {
    const Eigen::Index ra = a.rows(), ca = a.cols();
    const Eigen::Index rows = rows_b * cols_b * ra * ca;
    const Eigen::Index cols = rows_b * cols_b;
    if (rows <= 0 || cols <= 0) throw std::overflow_error("lemma1_transform: shape overflow");

    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(rows));
    // Row layout follows vec(B kron A): outer index j over columns of B, then
    // k over columns of A, then i over rows of B, then r over rows of A.
    for (Eigen::Index j = 0; j < cols_b; ++j)
        for (Eigen::Index k = 0; k < ca; ++k)
            for (Eigen::Index i = 0; i < rows_b; ++i)
                for (Eigen::Index r = 0; r < ra; ++r) {
                    const Eigen::Index row = ((j * ca + k) * rows_b + i) * ra + r;
                    const Eigen::Index col = j * rows_b + i;
                    if (a(r, k) != Complex(0.0, 0.0)) trip.emplace_back(row, col, a(r, k));
                }
    SparseComplexMatrix s(rows, cols);
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

/// Test-only oracle for vec(a .* b) == diag(vec(a)) vec(b).
inline bool hadamard_vec_identity_check(const ComplexMatrix& a, const ComplexMatrix& b, double tol = 1e-12) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("hadamard_vec_identity_check: shape mismatch");
    const ComplexVector lhs = vec((a.array() * b.array()).matrix());
    const ComplexVector rhs = vec(a).asDiagonal() * vec(b);
    return (lhs - rhs).norm() <= tol * std::max(1.0, rhs.norm());
}

}  // namespace hfce

#endif
