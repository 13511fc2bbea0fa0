#include "nfet/subspace.hpp"

#include <ostream>

#include "nfet/error.hpp"

namespace nfet::subspace {

SubspaceBasis basis_from_generators(const std::vector<CVec>& generators, double tol) {
  if (generators.empty()) throw DomainError("subspace: no generators");
  if (!(tol >= 0.0)) throw DomainError("subspace: tolerance must be non-negative");
  const Eigen::Index n = generators.front().size();
  std::vector<const CVec*> kept;
  for (const CVec& g : generators) {
    if (g.size() != n) throw DimensionError("subspace: generators have different lengths");
    if (g.norm() > 0.0) kept.push_back(&g);
  }
  if (kept.empty()) throw DomainError("subspace: all generators are zero");

  CMat stack(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) stack.col(i) = kept[i]->normalized();

  Eigen::BDCSVD<CMat> svd(stack, Eigen::ComputeThinU);
  const RVec& sigma = svd.singularValues();
  const double cut = tol * sigma[0];
  int rank = 0;
  while (rank < sigma.size() && sigma[rank] > cut) ++rank;

  SubspaceBasis out;
  out.basis = svd.matrixU().leftCols(rank);
  out.rank = rank;
  out.tolerance = tol;
  out.generator_count = static_cast<int>(kept.size());
  out.singular_values = sigma;
  return out;
}

SubspaceBasis build_subspace(const std::vector<CVec>& channels, const geometry::EtPointCloud& cloud,
                             const geometry::ArrayGeometry& array, double tol) {
  std::vector<CVec> gens(channels.begin(), channels.end());
  gens.reserve(channels.size() + cloud.size() * (1 + cloud.num_params));
  for (int m = 0; m < cloud.size(); ++m) {
    gens.push_back(geometry::steering(array, cloud.positions[m]));
    const CMat abar = geometry::steering_jacobian(array, cloud.positions[m]) * cloud.jacobians[m].cast<cplx>();
    for (Eigen::Index p = 0; p < abar.cols(); ++p) gens.emplace_back(abar.col(p));
  }
  return basis_from_generators(gens, tol);
}

CVec reduce_vector(const SubspaceBasis& u, const CVec& h) {
  if (h.size() != u.ambient_dim()) throw DimensionError("reduce_vector: dimension mismatch");
  return u.basis.adjoint() * h;
}

fisher::FisherOperators reduce_q(const SubspaceBasis& u, const fisher::FisherOperators& ops) {
  if (ops.num_elements != u.ambient_dim()) throw DimensionError("reduce_q: basis/operator dimension mismatch");
  fisher::FisherOperators out;
  out.num_params = ops.num_params;
  out.num_elements = u.rank;
  for (const CMat& f : ops.derivatives) out.derivatives.push_back(u.basis.adjoint() * f * u.basis);
  out.q_grid.reserve(ops.q_grid.size());
  for (const CMat& q : ops.q_grid) {
    CMat r = u.basis.adjoint() * q * u.basis;
    out.q_grid.push_back(hermitian_part(r));
  }
  return out;
}

CMat lift(const SubspaceBasis& u, const CMat& x) {
  if (x.rows() != u.rank || x.cols() != u.rank) throw DimensionError("lift: expected an r x r matrix");
  return hermitian_part(u.basis * x * u.basis.adjoint());
}

CMat project_covariance(const SubspaceBasis& u, const CMat& w) {
  if (w.rows() != u.ambient_dim() || w.cols() != u.ambient_dim()) {
    throw DimensionError("project_covariance: dimension mismatch");
  }
  return lift(u, u.basis.adjoint() * w * u.basis);
}

void write_spectrum_csv(const SubspaceBasis& u, std::ostream& os) {
  os << "index,sigma,kept\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < u.singular_values.size(); ++i) {
    os << i << ',' << u.singular_values[i] << ',' << (i < u.rank ? 1 : 0) << '\n';
  }
}

}  // namespace nfet::subspace
