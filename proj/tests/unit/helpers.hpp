#pragma once

#include <random>

#include "nfet/config.hpp"
#include "nfet/fisher.hpp"
#include "nfet/geometry.hpp"
#include "nfet/subspace.hpp"

namespace nfet::test {

inline CMat complex_gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> nd;
  CMat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = cplx(nd(rng), nd(rng));
  }
  return m;
}

inline CMat random_psd(std::mt19937_64& rng, int n, int rank = -1) {
  const CMat b = complex_gaussian(rng, n, rank < 0 ? n : rank);
  return b * b.adjoint() / static_cast<double>(n);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline double min_eig(const CMat& m) {
  return Eigen::SelfAdjointEigenSolver<CMat>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

/// Table I scenario at a smaller array size.
inline config::Scenario small_scenario(int n, double length = 3.0, double width = 0.8) {
  config::ScenarioConfig cfg;
  cfg.num_elements = n;
  cfg.target.length = length;
  cfg.target.width = width;
  return config::build_scenario(cfg);
}

}  // namespace nfet::test
