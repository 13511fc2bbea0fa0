#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "nfet/config.hpp"
#include "nfet/design.hpp"

namespace nfet::harness {

enum class Method { ProposedFull, ProposedReduced, Focus, PointTarget, TrmEt };

std::string to_string(Method m);
/// Accepts proposed-full, proposed-reduced, focus, point-target, trm-et.
Method parse_method(const std::string& name);
std::vector<Method> all_methods();

/// One CSV line. CRB always comes from verify_solution.
struct ResultRow {
  std::string scenario_hash;
  double axis_value = std::numeric_limits<double>::quiet_NaN();
  std::string method;
  double crb = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
  int r = 0;
  long variable_entries = 0;
  double solve_ms = 0.0;
  std::string status;
};

inline constexpr const char* kResultHeader =
    "scenario_hash,axis_value,method,crb,feasible,r,variable_entries,solve_ms,status";

void write_header(std::ostream& os);
void write_row(std::ostream& os, const ResultRow& row);

struct DesignRun {
  design::DesignSolution solution;
  design::VerificationReport report;
  ResultRow row;
};

/// Solves one method on a built scenario and verifies the result.
DesignRun run_method(const config::Scenario& scenario, Method method, const conic::Backend* backend = nullptr,
                     double axis_value = std::numeric_limits<double>::quiet_NaN());

/// Builds the scenario (cloud, operators, subspace) and runs one method.
/// Construction errors are rethrown as ConfigError with the scenario hash.
DesignRun run_design(const config::ScenarioConfig& cfg, Method method, const conic::Backend* backend = nullptr);

enum class Axis { Yc, Length, Phi, PowerBudget, NumElements };

std::string to_string(Axis a);
/// Accepts y_c, L, phi, P_max, N.
Axis parse_axis(const std::string& name);

struct SweepSpec {
  Axis axis = Axis::PowerBudget;
  // y_c and L in m, phi in degrees, P_max in dBW, N in elements.
  std::vector<double> grid;
  std::vector<Method> methods = all_methods();
  // Power sweeps run on the L = 5 m, b = 1.5 m target unless disabled.
  bool power_geometry = true;
  int jobs = 1;

  void validate() const;
};

/// Config for one grid point. L rescales both semi-axes so the aspect ratio is kept.
config::ScenarioConfig apply_axis(const config::ScenarioConfig& base, const SweepSpec& spec, double value);

/// Rows in grid order, one per (value, method). Failures become rows with
/// status "error" and the sweep continues. Rows are streamed to `csv` (with
/// header) when given.
std::vector<ResultRow> run_sweep(const config::ScenarioConfig& base, const SweepSpec& spec, std::ostream* csv = nullptr,
                                 std::ostream* log = nullptr);

struct BenchSpec {
  std::vector<int> sizes{16, 32, 48, 64, 96, 128};
  int repeats = 3;
  // A first run slower than this is not repeated and its timing is marked censored.
  double budget_ms = 120000.0;
};

struct BenchRow {
  int n = 0;
  int r = 0;
  long full_entries = 0;
  long reduced_entries = 0;
  double reduction_pct = 0.0;  // 100 (1 - r^2 / N^2)
  double full_ms = 0.0;        // median over repeats
  double reduced_ms = 0.0;
  std::string full_status;
  std::string reduced_status;
};

inline constexpr const char* kBenchHeader =
    "n,r,full_entries,reduced_entries,reduction_pct,full_ms,reduced_ms,full_status,reduced_status";

std::vector<BenchRow> run_bench(const config::ScenarioConfig& base, const BenchSpec& spec, std::ostream* csv = nullptr,
                                std::ostream* log = nullptr);

}  // namespace nfet::harness
