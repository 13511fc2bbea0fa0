#include "nfet/export.hpp"

#include <cmath>
#include <ostream>

#include "nfet/error.hpp"

namespace nfet::io {

using nlohmann::json;

namespace {

// JSON has no inf/nan; non-finite values are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

json matrix_json(const CMat& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      data.push_back(m(i, j).real());
      data.push_back(m(i, j).imag());
    }
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMat matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != 2 * rows * cols) {
    throw DimensionError("matrix data has " + std::to_string(data.size()) + " values, expected " +
                         std::to_string(2 * rows * cols));
  }
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const size_t k = 2 * static_cast<size_t>(i * cols + c);
      m(i, c) = cplx(data[k].get<double>(), data[k + 1].get<double>());
    }
  }
  return m;
}

json solution_json(const config::Scenario& sc, harness::Method method, const harness::DesignRun& run) {
  const design::DesignSolution& sol = run.solution;
  const design::Diagnostics& d = sol.diagnostics;

  json comm = json::array();
  for (const CMat& w : sol.comm_covariances) comm.push_back(matrix_json(w));
  json beams = json::array();
  for (const CVec& b : sol.beams) beams.push_back(matrix_json(b));
  json checks = json::array();
  for (const design::Check& c : run.report.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", number(c.value)}, {"limit", number(c.limit)},
                      {"detail", c.detail}});
  }

  json doc = {
      {"format", "nfet-solution"},
      {"version", 1},
      {"scenario_hash", sc.hash},
      {"scenario", config::to_json(sc.config)},
      {"method", harness::to_string(method)},
      {"status", run.row.status},
      {"feasible", run.row.feasible},
      {"crb", number(run.row.crb)},
      {"objective", number(sol.objective)},
      {"subspace_rank", run.row.r},
      {"comm_covariances", std::move(comm)},
      {"beams", std::move(beams)},
      {"verification", std::move(checks)},
      {"diagnostics",
       {{"backend", d.backend},
        {"backend_status", conic::to_string(d.backend_status)},
        {"iterations", d.iterations},
        {"primal_residual", number(d.primal_residual)},
        {"dual_residual", number(d.dual_residual)},
        {"relative_gap", number(d.relative_gap)},
        {"solve_ms", d.solve_ms},
        {"assembly_ms", d.assembly_ms},
        {"variable_dim", d.variable_dim},
        {"variable_entries", d.variable_entries},
        {"retried", d.retried},
        {"min_sinr_power", number(d.min_sinr_power)},
        {"message", d.message}}},
  };
  if (sol.sensing_covariance.size() > 0) doc["sensing_covariance"] = matrix_json(sol.sensing_covariance);
  if (sol.transmit_covariance.size() > 0) doc["transmit_covariance"] = matrix_json(sol.transmit_covariance);
  if (sol.recovered) doc["recovered_sensing_covariance"] = matrix_json(sol.recovered_sensing);
  return doc;
}

void write_solution(std::ostream& os, const config::Scenario& sc, harness::Method method,
                    const harness::DesignRun& run) {
  os << solution_json(sc, method, run).dump(1) << '\n';
}

}  // namespace nfet::io
