#pragma once

#include <iosfwd>
#include <vector>

#include "nfet/fisher.hpp"
#include "nfet/geometry.hpp"
#include "nfet/types.hpp"

namespace nfet::subspace {

// Relative singular-value cut used for design solves.
inline constexpr double kDefaultTolerance = 1e-6;
// Numerical-rank cut for checks that need the exact span.
inline constexpr double kExactSpanTolerance = 1e-12;

struct SubspaceBasis {
  CMat basis;  // N x r, orthonormal columns
  int rank = 0;
  double tolerance = kDefaultTolerance;
  int generator_count = 0;   // non-zero generators fed to the SVD
  RVec singular_values;      // of the normalised generator stack, descending

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  CMat projector() const { return basis * basis.adjoint(); }
};

/// Orthonormal basis of span(h_1..h_K, a_1..a_M, columns of A_1..A_M).
///
/// Generators are l2-normalised; zero generators (e.g. the orientation and
/// size columns of the centre point) are skipped. Singular directions with
/// sigma_i > tol * sigma_max are kept.
SubspaceBasis build_subspace(const std::vector<CVec>& channels, const geometry::EtPointCloud& cloud,
                             const geometry::ArrayGeometry& array, double tol = kDefaultTolerance);

/// Same truncation applied to an explicit generator list.
SubspaceBasis basis_from_generators(const std::vector<CVec>& generators, double tol = kDefaultTolerance);

CVec reduce_vector(const SubspaceBasis& u, const CVec& h);

/// Q_pq -> U^H Q_pq U for the whole grid (F_p is reduced too).
fisher::FisherOperators reduce_q(const SubspaceBasis& u, const fisher::FisherOperators& ops);

CMat lift(const SubspaceBasis& u, const CMat& x);

/// Pi W Pi with Pi = U U^H.
CMat project_covariance(const SubspaceBasis& u, const CMat& w);

/// CSV with columns index,sigma,kept.
void write_spectrum_csv(const SubspaceBasis& u, std::ostream& os);

}  // namespace nfet::subspace
