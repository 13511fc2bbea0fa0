// One PASS/FAIL line per primary acceptance criterion; exit status 1 if any fails.
// Progress goes to stderr.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nfet/config.hpp"
#include "nfet/harness.hpp"
#include "nfet/subspace.hpp"
#include "nfet/validate.hpp"

using namespace nfet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Line {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Proposed solutions collected for the rank-one recovery criterion.
struct Solved {
  std::string label;
  design::DesignProblem problem;
  design::DesignSolution solution;
};

Line subspace_dimension(std::vector<Solved>& solved) {
  const auto t0 = Clock::now();
  const config::Scenario sc = config::build_scenario(config::ScenarioConfig{});
  const harness::DesignRun run = harness::run_method(sc, harness::Method::ProposedReduced);
  const double secs = seconds_since(t0);
  const int r = sc.problem.basis->rank;
  const int n = sc.config.num_elements;
  if (run.solution.ok()) solved.push_back({"table-1", sc.problem, run.solution});
  const bool entries_ok = r != 21 || (r * r == 441 && n * n == 4096);
  const bool ok = r >= 19 && r <= 23 && entries_ok && secs < 10.0 && run.solution.ok();
  return {"subspace-dimension", ok,
          fmt("r=%d in [19,23], entries %d vs %d, reduced solve %s, %.2f s (< 10 s)", r, r * r, n * n,
              design::to_string(run.solution.status).c_str(), secs)};
}

Line reduction_trend(const std::vector<harness::BenchRow>& rows, double secs) {
  bool mono = true;
  std::ostringstream pct;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && !(rows[i].reduction_pct > rows[i - 1].reduction_pct)) mono = false;
    pct << (i ? " " : "") << rows[i].n << ":" << fmt("%.1f%%", rows[i].reduction_pct) << "(r=" << rows[i].r << ")";
  }
  const double lo = rows.front().reduction_pct, hi = rows.back().reduction_pct;
  const bool ok = mono && std::abs(lo - 44.0) <= 10.0 && std::abs(hi - 89.0) <= 10.0 && secs < 1200.0;
  return {"reduction-trend", ok,
          pct.str() + fmt("; monotone=%s, endpoints %.1f%% (44+-10) and %.1f%% (89+-10), %.0f s (< 1200 s)",
                          mono ? "yes" : "no", lo, hi, secs)};
}

Line runtime_gain(const std::vector<harness::BenchRow>& rows) {
  bool ok = true;
  std::ostringstream os;
  for (const auto& r : rows) {
    if (r.n < 64) continue;
    const double ratio = r.full_ms / r.reduced_ms;
    ok = ok && ratio > 1.0 && r.full_status == "optimal" && r.reduced_status == "optimal";
    os << (os.tellp() > 0 ? ", " : "") << "N=" << r.n << fmt(" %.0f/%.0f ms ratio %.1f", r.full_ms, r.reduced_ms, ratio);
  }
  return {"runtime-gain", ok, "median full/reduced solve time: " + os.str() + " (ratio > 1)"};
}

config::ScenarioConfig random_scenario(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  config::ScenarioConfig cfg;
  cfg.num_elements = n;
  const double length = 1.0 + 4.0 * u(rng);
  cfg.target = geometry::EtParams::make(-8.0 + 16.0 * u(rng), 12.0 + 23.0 * u(rng), -kPi + 2 * kPi * u(rng), length,
                                        (0.3 + 0.5 * u(rng)) * length);
  for (auto& user : cfg.users) {
    user.range = 8.0 + 22.0 * u(rng);
    user.angle = config::deg_to_rad(-60.0 + 120.0 * u(rng));
  }
  return cfg;
}

Line subspace_exactness(std::vector<Solved>& solved) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst_gap = 0.0, worst_identity = 0.0;
  int agree = 0, attempted = 0;
  std::string failure;
  std::mt19937_64 wrng(7);
  std::normal_distribution<double> nd;
  while (agree < 20 && attempted < 40) {
    ++attempted;
    const config::Scenario sc = config::build_scenario(random_scenario(rng, 32));
    const design::DesignSolution full = design::solve_full_sdr(sc.problem, sc.config.solver);
    const design::DesignSolution red = design::solve_reduced_sdr(sc.problem, sc.config.solver);
    if (!full.ok() || !red.ok()) {
      if (full.status != red.status) {
        failure = "status mismatch on scenario " + sc.hash + ": full " + design::to_string(full.status) +
                  ", reduced " + design::to_string(red.status);
      }
      continue;
    }
    ++agree;
    worst_gap = std::max(worst_gap, rel(red.objective, full.objective));
    solved.push_back({"random-" + sc.hash + "-full", sc.problem, full});
    solved.push_back({"random-" + sc.hash + "-reduced", sc.problem, red});

    // Projection identities on the exact span with random PSD covariances.
    const subspace::SubspaceBasis u =
        subspace::build_subspace(sc.channels, sc.cloud, sc.array, subspace::kExactSpanTolerance);
    const auto& ops = *sc.problem.operators;
    for (int trial = 0; trial < 3; ++trial) {
      CMat b(32, 32);
      for (int i = 0; i < b.size(); ++i) b.data()[i] = cplx(nd(wrng), nd(wrng));
      const CMat w = b * b.adjoint() / 32.0;
      const CMat pw = subspace::project_covariance(u, w);
      for (const CVec& h : sc.channels) {
        worst_identity = std::max(worst_identity, rel(h.dot(pw * h).real(), h.dot(w * h).real()));
      }
      for (int p = 0; p < ops.num_params; ++p) {
        for (int q = 0; q < ops.num_params; ++q) {
          const double a = fisher::trace_product(ops.q(p, q), w);
          worst_identity = std::max(worst_identity, std::abs(fisher::trace_product(ops.q(p, q), pw) - a) /
                                                        (ops.q(p, q).norm() * w.norm()));
        }
      }
      if (pw.trace().real() > w.trace().real() + 1e-12) worst_identity = std::max(worst_identity, 1.0);
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = agree == 20 && failure.empty() && worst_gap <= 1e-4 && worst_identity <= 1e-9 && secs < 600.0;
  std::string detail = fmt("%d/20 scenarios at N=32 solved (%d drawn), max objective gap %.2e (<= 1e-4), "
                           "max identity residual %.2e (<= 1e-9), %.0f s (< 600 s)",
                           agree, attempted, worst_gap, worst_identity, secs);
  if (!failure.empty()) detail += "; " + failure;
  return {"subspace-exactness", ok, detail};
}

Line dominance(std::vector<Solved>& solved) {
  const auto t0 = Clock::now();
  bool ok = true;
  std::vector<std::string> notes;

  auto compare = [&](const config::Scenario& sc, const std::string& label) -> double {
    double proposed = std::numeric_limits<double>::quiet_NaN();
    for (harness::Method m : harness::all_methods()) {
      const harness::DesignRun run = harness::run_method(sc, m);
      const bool is_proposed = m == harness::Method::ProposedFull || m == harness::Method::ProposedReduced;
      if (is_proposed) {
        if (!run.solution.ok() || !run.row.feasible) {
          ok = false;
          notes.push_back(label + " " + harness::to_string(m) + " " + run.row.status);
          continue;
        }
        solved.push_back({label + "-" + harness::to_string(m), sc.problem, run.solution});
        if (m == harness::Method::ProposedReduced) proposed = run.row.crb;
        continue;
      }
      if (!run.row.feasible || !std::isfinite(run.row.crb)) {
        notes.push_back(label + " " + harness::to_string(m) + " " + run.row.status + " (not compared)");
        continue;
      }
      if (!(proposed <= run.row.crb * (1.0 + 1e-6))) {
        ok = false;
        notes.push_back(label + fmt(" proposed %.4e > ", proposed) + harness::to_string(m) + fmt(" %.4e", run.row.crb));
      }
    }
    return proposed;
  };

  const config::Scenario table1 = config::build_scenario(config::ScenarioConfig{});
  const double c_table = compare(table1, "table-1");

  harness::SweepSpec spec;
  spec.axis = harness::Axis::PowerBudget;
  spec.grid = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0};
  std::vector<double> curve;
  for (double p : spec.grid) {
    const config::Scenario sc = config::build_scenario(harness::apply_axis(config::ScenarioConfig{}, spec, p));
    curve.push_back(compare(sc, fmt("P=%gdBW", p)));
  }
  bool mono = true;
  for (size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i] <= curve[i - 1] * (1.0 + 1e-6))) mono = false;
  }
  const double secs = seconds_since(t0);
  ok = ok && mono && secs < 900.0;
  std::ostringstream os;
  os << fmt("Table I proposed %.3e; L=5 m, b=1.5 m power curve", c_table);
  for (size_t i = 0; i < curve.size(); ++i) os << fmt(" %g:%.3e", spec.grid[i], curve[i]);
  os << fmt("; non-increasing=%s, %.0f s (< 900 s)", mono ? "yes" : "no", secs);
  for (const auto& n : notes) os << "; " << n;
  return {"dominance-ordering", ok, os.str()};
}

Line fisher_correctness() {
  validate::Options opt;
  opt.max_elements = 12;
  opt.random_draws = 100;
  opt.run_solves = false;
  config::ScenarioConfig cfg;
  const validate::Report rep = validate::run_validate(cfg, opt);
  bool ok = true;
  std::ostringstream os;
  for (const char* name : {"fisher:snapshot-oracle", "steering:jacobian", "cloud:jacobian", "fisher:t-doubling"}) {
    bool found = false;
    for (const auto& c : rep.checks) {
      if (c.name != name) continue;
      found = true;
      ok = ok && c.passed;
      os << (os.tellp() > 0 ? ", " : "") << name << fmt(" %.2e (<= %.0e)", c.value, c.limit);
    }
    ok = ok && found;
  }
  return {"fisher-correctness", ok, fmt("N=%d, 100 draws: ", rep.num_elements) + os.str()};
}

Line sdr_tightness(const std::vector<Solved>& solved) {
  bool ok = !solved.empty();
  double drift = 0.0, crb_change = 0.0, min_ratio = std::numeric_limits<double>::infinity();
  std::string failure;
  for (const Solved& s : solved) {
    const design::VerificationReport rep = design::verify_solution(s.problem, s.solution);
    bool seen_recovery = false;
    for (const auto& c : rep.checks) {
      const bool recovery = c.name == "recovery:rx" || c.name == "crb~" || c.name.rfind("sinr~:", 0) == 0 ||
                            c.name.rfind("useful:", 0) == 0 || c.name == "psd:W0~";
      if (!recovery) continue;
      seen_recovery = true;
      if (c.name == "recovery:rx") drift = std::max(drift, c.value);
      if (c.name == "crb~") crb_change = std::max(crb_change, c.value);
      if (c.name.rfind("sinr~:", 0) == 0) min_ratio = std::min(min_ratio, c.value);
      if (!c.passed && failure.empty()) failure = s.label + " " + c.name + fmt(" %.3e", c.value);
      ok = ok && c.passed;
    }
    ok = ok && seen_recovery;
  }
  std::string detail = fmt("%zu solved designs: max R_x drift %.2e (<= 1e-10), min SINR/target %.9f (>= 1-1e-6), "
                           "max CRB change %.2e (<= 1e-6)",
                           solved.size(), drift, min_ratio, crb_change);
  if (!failure.empty()) detail += "; first failure: " + failure;
  return {"sdr-tightness", ok, detail};
}

Line degenerate_limit() {
  config::ScenarioConfig cfg;
  cfg.target.length = 0.01;
  cfg.target.width = 0.01;
  const config::Scenario sc = config::build_scenario(cfg);
  const harness::DesignRun proposed = harness::run_method(sc, harness::Method::ProposedReduced);
  const harness::DesignRun point = harness::run_method(sc, harness::Method::PointTarget);
  const double a = proposed.row.crb, b = point.row.crb;
  if (!std::isfinite(a) || !std::isfinite(b)) {
    std::string why = "proposed " + proposed.row.status + fmt(" (CRB %g)", a) + ", point-target " + point.row.status +
                      fmt(" (CRB %g)", b);
    const std::string msg = !proposed.solution.diagnostics.message.empty() ? proposed.solution.diagnostics.message
                                                                           : point.solution.diagnostics.message;
    if (!msg.empty()) why += ": " + msg;
    return {"degenerate-limit", false,
            "L=b=0.01 m: objectives undefined, " + why +
                "; a circular target leaves the orientation with no Fisher information under any covariance"};
  }
  const double gap = std::abs(a - b) / b;
  return {"degenerate-limit", gap <= 0.05, fmt("L=b=0.01 m: proposed %.4e, point-target %.4e, gap %.2f%% (<= 5%%)", a, b,
                                               100.0 * gap)};
}

}  // namespace

int main() {
  std::vector<Solved> solved;
  std::vector<Line> lines(8);

  std::cerr << "[acceptance] subspace dimension\n";
  lines[0] = subspace_dimension(solved);
  std::cerr << "[acceptance] Fisher oracles\n";
  lines[5] = fisher_correctness();
  std::cerr << "[acceptance] full vs reduced on random scenarios\n";
  lines[2] = subspace_exactness(solved);
  std::cerr << "[acceptance] dominance and power curve\n";
  lines[4] = dominance(solved);
  std::cerr << "[acceptance] degenerate limit\n";
  lines[7] = degenerate_limit();
  std::cerr << "[acceptance] complexity benchmark\n";
  const auto t0 = Clock::now();
  const std::vector<harness::BenchRow> bench = harness::run_bench(config::ScenarioConfig{}, {}, nullptr, &std::cerr);
  const double bench_secs = seconds_since(t0);
  lines[1] = reduction_trend(bench, bench_secs);
  lines[6] = runtime_gain(bench);
  lines[3] = sdr_tightness(solved);

  int failed = 0;
  for (const Line& l : lines) {
    std::cout << (l.passed ? "PASS " : "FAIL ") << l.name << ": " << l.detail << '\n';
    failed += l.passed ? 0 : 1;
  }
  std::cout << (lines.size() - failed) << "/" << lines.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
