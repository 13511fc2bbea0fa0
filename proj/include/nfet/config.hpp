#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfet/design.hpp"
#include "nfet/geometry.hpp"
#include "nfet/subspace.hpp"

namespace nfet::config {

/// Scenario description in linear SI units. dB, dBm, dBW and degrees exist
/// only in the JSON document and are converted when it is parsed.
struct ScenarioConfig {
  int num_elements = 64;
  double carrier_freq = 4.9e9;  // Hz

  geometry::EtParams target{0.0, 20.0, 30.0 * kPi / 180.0, 3.0, 0.8};
  geometry::EllipseLayout layout;
  std::vector<cplx> profile;  // empty means beta_m = 1 for every point

  std::vector<geometry::UserSpec> users{
      {15.0, -25.0 * kPi / 180.0, {1.0, 0.0}, 31.622776601683793},
      {18.0, 35.0 * kPi / 180.0, {1.0, 0.0}, 31.622776601683793},
  };

  double power_budget = 1.0;  // W
  double comm_noise = 1e-6;   // W
  double sensing_noise = 1e-6;  // W
  int snapshots = 16;

  double subspace_tol = subspace::kDefaultTolerance;
  design::SolverSettings solver;
  std::uint64_t seed = 1;

  void validate() const;
};

double db_to_linear(double db);
double dbm_to_watt(double dbm);
double dbw_to_watt(double dbw);
double linear_to_db(double x);
double watt_to_dbw(double w);
double deg_to_rad(double deg);
double rad_to_deg(double rad);

/// Parses and validates. Unknown keys, duplicate units (e.g. both `sinr_db`
/// and `sinr`) and out-of-range values raise ConfigError naming the field.
/// A profile given as {"file": path} is resolved against `base_dir`.
ScenarioConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ScenarioConfig load(const std::filesystem::path& path);

/// Canonical SI form; from_json(to_json(c)) == c.
nlohmann::json to_json(const ScenarioConfig& cfg);

/// FNV-1a 64 over the canonical JSON dump, as 16 hex digits.
std::string scenario_hash(const ScenarioConfig& cfg);

/// Everything a solve needs, rebuilt from a config.
struct Scenario {
  ScenarioConfig config;
  std::string hash;
  geometry::ArrayGeometry array;
  geometry::EtPointCloud cloud;
  std::vector<CVec> channels;
  design::DesignProblem problem;  // operators and basis filled in
};

Scenario build_scenario(const ScenarioConfig& cfg);

}  // namespace nfet::config
