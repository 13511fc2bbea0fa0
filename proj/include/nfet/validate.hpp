#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nfet/config.hpp"
#include "nfet/design.hpp"

namespace nfet::validate {

struct Options {
  // Runs at min(N, max_elements) elements.
  int max_elements = 16;
  int random_draws = 100;
  // Basis tolerance used for the projection identities (config value when unset).
  std::optional<double> subspace_tol;
  // Test hook: negate F_1 before the Q grid is formed.
  bool flip_derivative_sign = false;
  bool run_solves = true;
};

struct Report {
  int num_elements = 0;
  std::vector<design::Check> checks;
  bool passed() const;
  std::string summary() const;
};

/// Invariant suite at desk scale: finite-difference Jacobians, FIM oracles,
/// projection identities, full/reduced agreement, recovery, dominance.
Report run_validate(const config::ScenarioConfig& cfg, const Options& opt = {});

}  // namespace nfet::validate
