#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace nfet {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

// Hermitian part (A + A^H) / 2.
inline CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace nfet
