#include "nfet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <thread>

#include "nfet/baselines.hpp"
#include "nfet/error.hpp"

namespace nfet::harness {

namespace {

// Deterministic textual form of a double (round-trip precision).
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_ms(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

bool env_verbose() {
  const char* v = std::getenv("NFET_SOLVER_VERBOSE");
  return v && *v && std::string(v) != "0";
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ResultRow error_row(const std::string& hash, double axis_value, Method m) {
  ResultRow row;
  row.scenario_hash = hash;
  row.axis_value = axis_value;
  row.method = to_string(m);
  row.status = "error";
  return row;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::ProposedFull: return "proposed-full";
    case Method::ProposedReduced: return "proposed-reduced";
    case Method::Focus: return "focus";
    case Method::PointTarget: return "point-target";
    case Method::TrmEt: return "trm-et";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "' (expected proposed-full, proposed-reduced, focus, point-target, trm-et)");
}

std::vector<Method> all_methods() {
  return {Method::ProposedFull, Method::ProposedReduced, Method::Focus, Method::PointTarget, Method::TrmEt};
}

void write_header(std::ostream& os) { os << kResultHeader << '\n'; }

void write_row(std::ostream& os, const ResultRow& row) {
  os << row.scenario_hash << ',' << fmt(row.axis_value) << ',' << row.method << ',' << fmt(row.crb) << ','
     << (row.feasible ? 1 : 0) << ',' << row.r << ',' << row.variable_entries << ',' << fmt_ms(row.solve_ms) << ','
     << row.status << '\n';
}

DesignRun run_method(const config::Scenario& sc, Method method, const conic::Backend* backend, double axis_value) {
  design::SolverSettings settings = sc.config.solver;
  settings.verbose = settings.verbose || env_verbose();
  const design::DesignProblem& pb = sc.problem;

  DesignRun run;
  switch (method) {
    case Method::ProposedFull: run.solution = design::solve_full_sdr(pb, settings, backend); break;
    case Method::ProposedReduced: run.solution = design::solve_reduced_sdr(pb, settings, backend); break;
    case Method::Focus: run.solution = baselines::focus_design(pb, sc.array, sc.config.target); break;
    case Method::PointTarget:
      run.solution = baselines::point_target_design(pb, sc.array, sc.config.target, settings, backend);
      break;
    case Method::TrmEt: run.solution = baselines::trm_et_design(pb, settings, backend); break;
  }

  ResultRow& row = run.row;
  row.scenario_hash = sc.hash;
  row.axis_value = axis_value;
  row.method = to_string(method);
  row.r = pb.basis ? pb.basis->rank : 0;
  row.variable_entries = run.solution.diagnostics.variable_entries;
  row.solve_ms = run.solution.diagnostics.solve_ms;
  row.status = design::to_string(run.solution.status);

  if (run.solution.transmit_covariance.size() > 0) {
    run.report = design::verify_solution(pb, run.solution);
    row.crb = run.report.crb;
    // Feasibility is about the constraints; identifiability is reported through the CRB and status.
    row.feasible = std::all_of(run.report.checks.begin(), run.report.checks.end(),
                               [](const design::Check& c) { return c.passed || c.name == "fim"; });
    if (run.solution.ok() && !run.report.passed()) row.status = "verify-failed";
  }
  return run;
}

DesignRun run_design(const config::ScenarioConfig& cfg, Method method, const conic::Backend* backend) {
  config::Scenario sc;
  try {
    sc = config::build_scenario(cfg);
  } catch (const std::exception& e) {
    throw ConfigError("scenario " + config::scenario_hash(cfg) + ": " + e.what());
  }
  return run_method(sc, method, backend);
}

std::string to_string(Axis a) {
  switch (a) {
    case Axis::Yc: return "y_c";
    case Axis::Length: return "L";
    case Axis::Phi: return "phi";
    case Axis::PowerBudget: return "P_max";
    case Axis::NumElements: return "N";
  }
  return "unknown";
}

Axis parse_axis(const std::string& name) {
  for (Axis a : {Axis::Yc, Axis::Length, Axis::Phi, Axis::PowerBudget, Axis::NumElements}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown sweep axis '" + name + "' (expected y_c, L, phi, P_max, N)");
}

void SweepSpec::validate() const {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw ConfigError("sweep grid values must be finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("sweep grid must be strictly increasing");
    if (axis == Axis::NumElements && (grid[i] != std::floor(grid[i]) || grid[i] < 2)) {
      throw ConfigError("N grid values must be integers >= 2");
    }
  }
  if (methods.empty()) throw ConfigError("no methods to run");
  for (size_t i = 0; i < methods.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (methods[i] == methods[j]) throw ConfigError("method '" + to_string(methods[i]) + "' listed twice");
    }
  }
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

config::ScenarioConfig apply_axis(const config::ScenarioConfig& base, const SweepSpec& spec, double value) {
  config::ScenarioConfig cfg = base;
  switch (spec.axis) {
    case Axis::Yc: cfg.target.y_c = value; break;
    case Axis::Length: {
      const double s = value / cfg.target.length;
      cfg.target.length = value;
      cfg.target.width *= s;
      break;
    }
    case Axis::Phi: cfg.target.phi = geometry::wrap_angle(config::deg_to_rad(value)); break;
    case Axis::PowerBudget:
      cfg.power_budget = config::dbw_to_watt(value);
      if (spec.power_geometry) {
        cfg.target.length = 5.0;
        cfg.target.width = 1.5;
      }
      break;
    case Axis::NumElements: cfg.num_elements = static_cast<int>(value); break;
  }
  return cfg;
}

std::vector<ResultRow> run_sweep(const config::ScenarioConfig& base, const SweepSpec& spec, std::ostream* csv,
                                 std::ostream* log) {
  spec.validate();
  const size_t npts = spec.grid.size();
  std::vector<std::vector<ResultRow>> results(npts);
  std::vector<char> done(npts, 0);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<size_t> next{0};

  auto point = [&](size_t i, const conic::Backend* backend) {
    const double v = spec.grid[i];
    std::vector<ResultRow> rows;
    config::Scenario sc;
    std::string hash;
    bool built = false;
    try {
      const config::ScenarioConfig cfg = apply_axis(base, spec, v);
      hash = config::scenario_hash(cfg);
      sc = config::build_scenario(cfg);
      built = true;
    } catch (const std::exception& e) {
      std::lock_guard lock(mu);
      if (log) *log << to_string(spec.axis) << "=" << fmt(v) << ": " << e.what() << '\n';
    }
    for (Method m : spec.methods) {
      if (!built) {
        rows.push_back(error_row(hash, v, m));
        continue;
      }
      try {
        DesignRun run = run_method(sc, m, backend, v);
        if (log && !run.solution.diagnostics.message.empty()) {
          std::lock_guard lock(mu);
          *log << to_string(spec.axis) << "=" << fmt(v) << " " << to_string(m) << ": "
               << run.solution.diagnostics.message << '\n';
        }
        rows.push_back(std::move(run.row));
      } catch (const std::exception& e) {
        {
          std::lock_guard lock(mu);
          if (log) *log << to_string(spec.axis) << "=" << fmt(v) << " " << to_string(m) << ": " << e.what() << '\n';
        }
        rows.push_back(error_row(sc.hash, v, m));
      }
    }
    std::lock_guard lock(mu);
    results[i] = std::move(rows);
    done[i] = 1;
    cv.notify_all();
  };

  auto worker = [&] {
    const auto backend = conic::make_default_backend();
    for (size_t i = next++; i < npts; i = next++) point(i, backend.get());
  };

  if (csv) write_header(*csv);
  std::vector<std::thread> pool;
  const int nthreads = std::min<int>(spec.jobs, static_cast<int>(npts));
  if (nthreads > 1) {
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }

  std::vector<ResultRow> out;
  for (size_t i = 0; i < npts; ++i) {
    if (nthreads <= 1) {
      const auto backend = conic::make_default_backend();
      point(i, backend.get());
    }
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return done[i] != 0; });
    for (const ResultRow& row : results[i]) {
      if (csv) {
        write_row(*csv, row);
        csv->flush();
      }
      out.push_back(row);
    }
  }
  for (auto& t : pool) t.join();
  return out;
}

std::vector<BenchRow> run_bench(const config::ScenarioConfig& base, const BenchSpec& spec, std::ostream* csv,
                                std::ostream* log) {
  if (spec.sizes.empty()) throw ConfigError("bench sizes are empty");
  if (spec.repeats < 1) throw ConfigError("bench repeats must be at least 1");
  for (int n : spec.sizes) {
    if (n < 2) throw ConfigError("bench sizes must be >= 2");
  }
  if (csv) *csv << kBenchHeader << '\n';

  design::SolverSettings settings = base.solver;
  settings.verbose = settings.verbose || env_verbose();
  const auto backend = conic::make_default_backend();

  std::vector<BenchRow> rows;
  for (int n : spec.sizes) {
    config::ScenarioConfig cfg = base;
    cfg.num_elements = n;
    const config::Scenario sc = config::build_scenario(cfg);

    auto time_it = [&](bool reduced, std::string& status) {
      std::vector<double> ms;
      for (int rep = 0; rep < spec.repeats; ++rep) {
        const design::DesignSolution sol = reduced ? design::solve_reduced_sdr(sc.problem, settings, backend.get())
                                                   : design::solve_full_sdr(sc.problem, settings, backend.get());
        ms.push_back(sol.diagnostics.solve_ms);
        status = design::to_string(sol.status);
        if (rep == 0 && sol.diagnostics.solve_ms > spec.budget_ms) {
          status = "censored";
          break;
        }
      }
      return median(ms);
    };

    BenchRow row;
    row.n = n;
    row.r = sc.problem.basis->rank;
    row.full_entries = static_cast<long>(n) * n;
    row.reduced_entries = static_cast<long>(row.r) * row.r;
    row.reduction_pct = 100.0 * (1.0 - static_cast<double>(row.reduced_entries) / row.full_entries);
    row.reduced_ms = time_it(true, row.reduced_status);
    row.full_ms = time_it(false, row.full_status);
    if (log) {
      *log << "N=" << n << " r=" << row.r << " full " << fmt_ms(row.full_ms) << " ms (" << row.full_status
           << "), reduced " << fmt_ms(row.reduced_ms) << " ms (" << row.reduced_status << ")\n";
    }
    if (csv) {
      *csv << row.n << ',' << row.r << ',' << row.full_entries << ',' << row.reduced_entries << ','
           << fmt(row.reduction_pct) << ',' << fmt_ms(row.full_ms) << ',' << fmt_ms(row.reduced_ms) << ','
           << row.full_status << ',' << row.reduced_status << '\n';
      csv->flush();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace nfet::harness
