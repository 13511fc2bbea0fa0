#pragma once

#include <vector>

#include "nfet/geometry.hpp"
#include "nfet/types.hpp"

namespace nfet::fisher {

struct SensingConfig {
  int snapshots = 16;
  double noise_power = 1e-6;  // W

  double scale() const { return 2.0 * snapshots / noise_power; }
};

/// Derivative operators F_p of the echo mean and the Hermitian matrices
/// Q_pq = (F_p^H F_q + F_q^H F_p) / 2 that make the FIM linear in R_x.
struct FisherOperators {
  int num_params = 0;
  int num_elements = 0;
  std::vector<CMat> derivatives;  // F_p
  std::vector<CMat> q_grid;       // row-major D x D, empty until build_q

  const CMat& q(int p, int r) const { return q_grid[p * num_params + r]; }
  bool has_q() const { return !q_grid.empty(); }
};

/// F_p = sum_m beta_m (a_m [A_m]_{:,p}^H + [A_m]_{:,p} a_m^H) with A_m = G_m D_m.
FisherOperators build_derivative_operators(const geometry::EtPointCloud& cloud,
                                           const geometry::ArrayGeometry& array);

/// Fills the symmetric Q grid in place and returns it.
FisherOperators& build_q(FisherOperators& ops);

/// Both steps.
FisherOperators build_operators(const geometry::EtPointCloud& cloud, const geometry::ArrayGeometry& array);

/// Re tr(A B) for Hermitian A, B (vectorised over the interleaved storage).
double trace_product(const CMat& a, const CMat& b);

/// J_pq = (2T / sigma_s^2) tr(Q_pq R_x), symmetrised.
RMat fim(const FisherOperators& ops, const CMat& rx, const SensingConfig& cfg);

struct CrbResult {
  double value = 0.0;  // tr(J^-1)
  RMat covariance;     // J^-1
  double min_eigenvalue = 0.0;
  double condition = 0.0;
};

inline constexpr double kMaxFimCondition = 1e12;

/// Throws SingularFimError when J is not positive definite or its condition
/// number exceeds kMaxFimCondition.
CrbResult crb(const RMat& j);

}  // namespace nfet::fisher
