#ifndef HFCE_TYPES_HPP
#define HFCE_TYPES_HPP

#include <complex>
#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace hfce {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;
using SparseComplexMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

}  // namespace hfce

#endif
