#include "nfet/fisher.hpp"

#include <cmath>
#include <sstream>

#include "nfet/error.hpp"
#include "nfet/simd/kernels.hpp"

namespace nfet::fisher {

FisherOperators build_derivative_operators(const geometry::EtPointCloud& cloud,
                                           const geometry::ArrayGeometry& array) {
  const int d = cloud.num_params;
  const int n = array.num_elements;
  if (d < 1) throw DimensionError("point cloud has no geometric parameters");
  if (static_cast<int>(cloud.jacobians.size()) != cloud.size() || cloud.profile.size() != cloud.size()) {
    throw DimensionError("point cloud arrays have inconsistent lengths");
  }
  FisherOperators ops;
  ops.num_params = d;
  ops.num_elements = n;
  ops.derivatives.assign(d, CMat::Zero(n, n));
  for (int m = 0; m < cloud.size(); ++m) {
    if (cloud.jacobians[m].cols() != d) {
      throw DimensionError("jacobian of point " + std::to_string(m) + " has " +
                           std::to_string(cloud.jacobians[m].cols()) + " columns, expected " + std::to_string(d));
    }
    const cplx beta = cloud.profile[m];
    if (beta == cplx(0.0)) continue;
    const CVec a = geometry::steering(array, cloud.positions[m]);
    const CMat abar = geometry::steering_jacobian(array, cloud.positions[m]) * cloud.jacobians[m].cast<cplx>();
    for (int p = 0; p < d; ++p) {
      ops.derivatives[p].noalias() += beta * (a * abar.col(p).adjoint());
      ops.derivatives[p].noalias() += beta * (abar.col(p) * a.adjoint());
    }
  }
  return ops;
}

FisherOperators& build_q(FisherOperators& ops) {
  const int d = ops.num_params;
  ops.q_grid.assign(d * d, CMat());
  for (int p = 0; p < d; ++p) {
    for (int r = p; r < d; ++r) {
      CMat q = ops.derivatives[p].adjoint() * ops.derivatives[r];
      q = 0.5 * (q + q.adjoint()).eval();
      ops.q_grid[p * d + r] = q;
      if (r != p) ops.q_grid[r * d + p] = std::move(q);
    }
  }
  return ops;
}

FisherOperators build_operators(const geometry::EtPointCloud& cloud, const geometry::ArrayGeometry& array) {
  FisherOperators ops = build_derivative_operators(cloud, array);
  build_q(ops);
  return ops;
}

double trace_product(const CMat& a, const CMat& b) {
  // For Hermitian B, tr(A B) = sum_ij A_ij conj(B_ij); its real part is the
  // plain dot product of the interleaved (re, im) storage.
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("trace_product: shape mismatch");
  return simd::dot(reinterpret_cast<const double*>(a.data()), reinterpret_cast<const double*>(b.data()),
                   2 * static_cast<std::size_t>(a.size()));
}

RMat fim(const FisherOperators& ops, const CMat& rx, const SensingConfig& cfg) {
  if (!ops.has_q()) throw std::logic_error("fim: Q grid not built");
  if (rx.rows() != ops.num_elements || rx.cols() != ops.num_elements) {
    throw DimensionError("fim: covariance is " + std::to_string(rx.rows()) + "x" + std::to_string(rx.cols()) +
                         ", operators are " + std::to_string(ops.num_elements));
  }
  if (cfg.snapshots < 1 || !(cfg.noise_power > 0.0)) throw DomainError("fim: invalid sensing configuration");
  const double rnorm = rx.norm();
  if ((rx - rx.adjoint()).norm() > 1e-10 * std::max(1.0, rnorm)) {
    throw DomainError("fim: transmit covariance is not Hermitian");
  }
  if (rnorm > 0.0) {
    const double lmin = Eigen::SelfAdjointEigenSolver<CMat>(rx, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (lmin < -1e-9 * std::max(1.0, rnorm)) {
      throw DomainError("fim: transmit covariance is not positive semidefinite (min eig " + std::to_string(lmin) + ")");
    }
  }
  const int d = ops.num_params;
  const double s = cfg.scale();
  RMat j(d, d);
  for (int p = 0; p < d; ++p) {
    for (int r = p; r < d; ++r) {
      j(p, r) = s * trace_product(ops.q(p, r), rx);
      j(r, p) = j(p, r);
    }
  }
  return j;
}

CrbResult crb(const RMat& j) {
  if (j.rows() != j.cols() || j.rows() == 0) throw DimensionError("crb: FIM must be square and non-empty");
  const RMat sym = 0.5 * (j + j.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> eig(sym);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(lmin > 0.0) || cond > kMaxFimCondition) {
    std::ostringstream os;
    os << "singular FIM: min eigenvalue " << lmin << ", condition " << cond
       << " (the covariance does not excite every geometric parameter)";
    throw SingularFimError(os.str(), lmin, cond);
  }
  Eigen::LLT<RMat> llt(sym);
  CrbResult out;
  out.covariance = llt.solve(RMat::Identity(j.rows(), j.cols()));
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  out.value = out.covariance.trace();
  out.min_eigenvalue = lmin;
  out.condition = cond;
  return out;
}

}  // namespace nfet::fisher
