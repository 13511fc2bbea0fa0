#include "nfet/validate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "nfet/baselines.hpp"
#include "nfet/conic.hpp"
#include "nfet/error.hpp"
#include "nfet/fisher.hpp"
#include "nfet/geometry.hpp"
#include "nfet/subspace.hpp"

namespace nfet::validate {

namespace {

// Projection identities with the configured (truncated) basis hold to this
// relative accuracy at the default tolerance; the exact span reaches 1e-12.
constexpr double kIdentityTol = 1e-6;

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  CMat complex_gaussian(int rows, int cols) {
    CMat m(rows, cols);
    for (int j = 0; j < cols; ++j) {
      for (int i = 0; i < rows; ++i) m(i, j) = cplx(normal(), normal()) / std::sqrt(2.0);
    }
    return m;
  }
  CMat random_psd(int n) {
    const CMat b = complex_gaussian(n, n);
    return b * b.adjoint() / static_cast<double>(n);
  }
};

class Collector {
 public:
  std::vector<design::Check> checks;
  void add(std::string name, bool passed, double value, double limit, std::string detail = {}) {
    checks.push_back({std::move(name), passed, value, limit, std::move(detail)});
  }
  // value <= limit
  void below(std::string name, double value, double limit, std::string detail = {}) {
    add(std::move(name), value <= limit, value, limit, std::move(detail));
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// d a / d p written out per element, independent of the library Jacobian.
CMat steering_derivative_oracle(const geometry::ArrayGeometry& array, const geometry::Point2& p) {
  const int n = array.num_elements;
  const double k = 2.0 * kPi / array.wavelength;
  const double ref = std::hypot(p.x, p.y);
  CMat d(n, 2);
  for (int i = 0; i < n; ++i) {
    const double ex = p.x - array.element_x[i];
    const double ey = p.y - array.element_y[i];
    const double dist = std::hypot(ex, ey);
    const cplx a = std::polar(1.0 / std::sqrt(static_cast<double>(n)), -k * (dist - ref));
    d(i, 0) = a * cplx(0.0, -k) * (ex / dist - p.x / ref);
    d(i, 1) = a * cplx(0.0, -k) * (ey / dist - p.y / ref);
  }
  return d;
}

// J_pq = (2 / sigma^2) sum_t Re <dG/deta_p x_t, dG/deta_q x_t> with dG/deta_p
// re-summed from the per-element derivative above.
RMat snapshot_fim_oracle(const geometry::EtPointCloud& cloud, const geometry::ArrayGeometry& array, const CMat& x,
                         double noise) {
  const int n = array.num_elements;
  const int d = cloud.num_params;
  std::vector<CMat> dg(d, CMat::Zero(n, n));
  for (int m = 0; m < cloud.size(); ++m) {
    const CVec a = geometry::steering(array, cloud.positions[m]);
    const CMat ga = steering_derivative_oracle(array, cloud.positions[m]);
    for (int p = 0; p < d; ++p) {
      const CVec da = ga.col(0) * cloud.jacobians[m](0, p) + ga.col(1) * cloud.jacobians[m](1, p);
      dg[p] += cloud.profile[m] * (da * a.adjoint() + a * da.adjoint());
    }
  }
  std::vector<CMat> echo(d);
  for (int p = 0; p < d; ++p) echo[p] = dg[p] * x;
  RMat j(d, d);
  for (int p = 0; p < d; ++p) {
    for (int q = 0; q < d; ++q) j(p, q) = 2.0 / noise * (echo[p].adjoint() * echo[q]).trace().real();
  }
  return j;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const design::Check& c) { return c.passed; });
}

std::string Report::summary() const {
  std::ostringstream os;
  for (const design::Check& c : checks) {
    os << (c.passed ? "ok   " : "FAIL ") << c.name << " value=" << c.value << " limit=" << c.limit;
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << '\n';
  }
  int failed = 0;
  for (const design::Check& c : checks) failed += c.passed ? 0 : 1;
  os << checks.size() - failed << "/" << checks.size() << " checks passed at N=" << num_elements << '\n';
  return os.str();
}

Report run_validate(const config::ScenarioConfig& base, const Options& opt) {
  config::ScenarioConfig cfg = base;
  cfg.num_elements = std::min(cfg.num_elements, opt.max_elements);
  if (opt.subspace_tol) cfg.subspace_tol = *opt.subspace_tol;
  cfg.validate();

  Report report;
  report.num_elements = cfg.num_elements;
  Collector out;
  Rng rng(cfg.seed);
  const int draws = opt.random_draws;

  const geometry::ArrayGeometry array = geometry::ArrayGeometry::ula(cfg.num_elements, cfg.carrier_freq);

  // Steering norm and Jacobian against central differences.
  {
    double norm_dev = 0.0, jac_err = 0.0;
    const double h = 1e-4;
    for (int i = 0; i < draws; ++i) {
      const geometry::Point2 p{rng.uniform(-30.0, 30.0), rng.uniform(5.0, 40.0)};
      norm_dev = std::max(norm_dev, std::abs(geometry::steering(array, p).norm() - 1.0));
      const CMat g = geometry::steering_jacobian(array, p);
      CMat fd(array.num_elements, 2);
      fd.col(0) = (geometry::steering(array, {p.x + h, p.y}) - geometry::steering(array, {p.x - h, p.y})) / (2 * h);
      fd.col(1) = (geometry::steering(array, {p.x, p.y + h}) - geometry::steering(array, {p.x, p.y - h})) / (2 * h);
      jac_err = std::max(jac_err, (g - fd).norm() / g.norm());
    }
    out.below("steering:norm", norm_dev, 1e-12, "max | ||a|| - 1 |");
    out.below("steering:jacobian", jac_err, 1e-6, "relative Frobenius error vs central differences");
  }

  // Ellipse point Jacobians against central differences.
  {
    double err = 0.0;
    const double h = 1e-6;
    for (int i = 0; i < draws; ++i) {
      const geometry::EtParams eta = geometry::EtParams::make(rng.uniform(-10.0, 10.0), rng.uniform(10.0, 40.0),
                                                              rng.uniform(-kPi, kPi), rng.uniform(0.5, 6.0),
                                                              rng.uniform(0.2, 3.0));
      const geometry::EtPointCloud cloud = geometry::ellipse_cloud(eta, cfg.layout);
      for (int p = 0; p < geometry::EtParams::kDim; ++p) {
        auto v = eta.as_vector();
        v[p] += h;
        const auto plus = geometry::ellipse_points(geometry::EtParams::from_vector(v), cfg.layout);
        v[p] -= 2 * h;
        const auto minus = geometry::ellipse_points(geometry::EtParams::from_vector(v), cfg.layout);
        for (int m = 0; m < cloud.size(); ++m) {
          err = std::max(err, std::abs((plus[m].x - minus[m].x) / (2 * h) - cloud.jacobians[m](0, p)));
          err = std::max(err, std::abs((plus[m].y - minus[m].y) / (2 * h) - cloud.jacobians[m](1, p)));
        }
      }
    }
    out.below("cloud:jacobian", err, 1e-6, "max absolute error vs central differences");
  }

  geometry::EtPointCloud cloud = geometry::ellipse_cloud(cfg.target, cfg.layout);
  if (!cfg.profile.empty()) cloud.profile = Eigen::Map<const CVec>(cfg.profile.data(), cfg.profile.size());
  fisher::FisherOperators ops = fisher::build_derivative_operators(cloud, array);
  if (opt.flip_derivative_sign) ops.derivatives[0] = -ops.derivatives[0];
  fisher::build_q(ops);
  const fisher::SensingConfig sensing{cfg.snapshots, cfg.sensing_noise};
  const int N = cfg.num_elements;

  // FIM from the Q grid against the snapshot sum.
  {
    const int T = 2 * N;
    const CMat x = rng.complex_gaussian(N, T);
    const CMat rx = x * x.adjoint() / static_cast<double>(T);
    const RMat j = fisher::fim(ops, rx, fisher::SensingConfig{T, cfg.sensing_noise});
    const RMat oracle = snapshot_fim_oracle(cloud, array, x, cfg.sensing_noise);
    out.below("fisher:snapshot-oracle", (j - oracle).norm() / oracle.norm(), 1e-8,
              "relative Frobenius gap between tr(Q R_x) and the snapshot sum");
  }
  {
    double herm = 0.0, sym = 0.0;
    for (int p = 0; p < ops.num_params; ++p) {
      for (int q = 0; q < ops.num_params; ++q) {
        const CMat& m = ops.q(p, q);
        const double scale = std::max(m.norm(), 1e-300);
        herm = std::max(herm, (m - m.adjoint()).norm() / scale);
        sym = std::max(sym, (m - ops.q(q, p)).norm() / scale);
      }
    }
    out.below("fisher:q-hermitian", herm, 1e-12);
    out.below("fisher:q-symmetric", sym, 1e-12);
  }
  {
    // tr(J^-1) against the eigenvalue sum on a random SPD matrix.
    const int d = ops.num_params;
    RMat b(d, d);
    for (int i = 0; i < d; ++i) {
      for (int k = 0; k < d; ++k) b(i, k) = rng.normal();
    }
    const RMat j = b * b.transpose() + 0.1 * RMat::Identity(d, d);
    const RVec lam = Eigen::SelfAdjointEigenSolver<RMat>(j).eigenvalues();
    out.below("fisher:crb-eigen-oracle", rel(fisher::crb(j).value, lam.cwiseInverse().sum()), 1e-10);
  }
  {
    const CMat rx = rng.random_psd(N);
    const double c1 = fisher::crb(fisher::fim(ops, rx, sensing)).value;
    const double c2 = fisher::crb(fisher::fim(ops, rx, {2 * cfg.snapshots, cfg.sensing_noise})).value;
    out.below("fisher:t-doubling", rel(c2, 0.5 * c1), 1e-10, "CRB(2T) vs CRB(T)/2");
  }

  // Projection identities: exact span, then the configured basis.
  std::vector<CVec> channels;
  for (const auto& u : cfg.users) channels.push_back(geometry::user_channel(array, u));
  auto identities = [&](const subspace::SubspaceBasis& u, const std::string& tag, double limit) {
    const CMat pi = u.projector();
    double range = 0.0, sinr = 0.0, obj = 0.0, power = 0.0;
    for (const CMat& f : ops.derivatives) {
      const double fn = f.norm();
      if (fn > 0.0) range = std::max(range, (f - pi * f).norm() / fn);
    }
    for (int i = 0; i < 5; ++i) {
      const CMat w = rng.random_psd(N);
      const CMat pw = subspace::project_covariance(u, w);
      for (const CVec& h : channels) {
        sinr = std::max(sinr, rel(h.dot(pw * h).real(), h.dot(w * h).real()));
      }
      for (int p = 0; p < ops.num_params; ++p) {
        for (int q = 0; q < ops.num_params; ++q) {
          const double a = fisher::trace_product(ops.q(p, q), w);
          const double scale = ops.q(p, q).norm() * w.norm();
          if (scale > 0.0) obj = std::max(obj, std::abs(fisher::trace_product(ops.q(p, q), pw) - a) / scale);
        }
      }
      power = std::max(power, pw.trace().real() - w.trace().real());
    }
    std::ostringstream hint;
    hint << "r=" << u.rank << ", tol=" << u.tolerance;
    if (range > limit) hint << "; basis under-spans the derivative operators, lower subspace_tol";
    out.below("subspace:" + tag + ":range", range, limit, hint.str());
    out.below("subspace:" + tag + ":sinr", sinr, limit, "h^H Pi W Pi h vs h^H W h");
    out.below("subspace:" + tag + ":objective", obj, limit, "tr(Q Pi W Pi) vs tr(Q W)");
    out.below("subspace:" + tag + ":power", power, 1e-12, "tr(Pi W Pi) - tr(W)");
  };
  const subspace::SubspaceBasis exact = subspace::build_subspace(channels, cloud, array, subspace::kExactSpanTolerance);
  identities(exact, "exact", 1e-9);
  const subspace::SubspaceBasis configured = subspace::build_subspace(channels, cloud, array, cfg.subspace_tol);
  identities(configured, "configured", kIdentityTol);
  {
    const int bound = std::min(N, static_cast<int>(channels.size()) + cloud.size() * (1 + ops.num_params));
    out.add("subspace:rank-bound", configured.rank <= bound, configured.rank, bound);
  }

  // Complex-to-real embedding.
  {
    const CMat x = rng.random_psd(N);
    const RMat y = conic::embed(x);
    const RVec ly = Eigen::SelfAdjointEigenSolver<RMat>(y).eigenvalues();
    const RVec lx = Eigen::SelfAdjointEigenSolver<CMat>(x).eigenvalues();
    double dev = 0.0;
    for (int i = 0; i < N; ++i) dev = std::max({dev, std::abs(ly[2 * i] - lx[i]), std::abs(ly[2 * i + 1] - lx[i])});
    out.below("embedding:spectrum", dev, 1e-10 * std::max(1.0, lx.maxCoeff()), "eigenvalues of embed(X) double X's");
    out.below("embedding:round-trip", (conic::unembed(y) - x).norm(), 1e-12);
  }

  if (opt.run_solves) {
    config::ScenarioConfig solve_cfg = cfg;
    config::Scenario sc = config::build_scenario(solve_cfg);
    design::DesignProblem pb = sc.problem;
    pb.operators = std::make_shared<fisher::FisherOperators>(ops);
    pb.basis = std::make_shared<subspace::SubspaceBasis>(configured);
    const auto backend = conic::make_default_backend();
    const design::SolverSettings& settings = cfg.solver;

    const design::DesignSolution full = design::solve_full_sdr(pb, settings, backend.get());
    const design::DesignSolution reduced = design::solve_reduced_sdr(pb, settings, backend.get());
    if (full.ok() && reduced.ok()) {
      out.below("sdr:full-vs-reduced", rel(reduced.objective, full.objective), 1e-4, "relative objective gap");
    } else {
      out.add("sdr:full-vs-reduced", false, 0.0, 1e-4,
              "full " + design::to_string(full.status) + ", reduced " + design::to_string(reduced.status) + ": " +
                  full.diagnostics.message + reduced.diagnostics.message);
    }
    double proposed = std::numeric_limits<double>::infinity();
    for (const auto* sol : {&full, &reduced}) {
      if (!sol->ok()) continue;
      const design::VerificationReport rep = design::verify_solution(pb, *sol);
      std::string failed;
      for (const auto& c : rep.checks) {
        if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
      }
      const std::string tag = sol == &full ? "full" : "reduced";
      out.add("sdr:tightness:" + tag, rep.passed(), rep.crb, sol->crb,
              failed.empty() ? "recovered beams feasible, CRB preserved" : "failed: " + failed);
      if (sol == &reduced || !std::isfinite(proposed)) proposed = rep.crb;
    }

    const std::vector<std::pair<std::string, design::DesignSolution>> baseline_runs = {
        {"focus", baselines::focus_design(pb, sc.array, cfg.target)},
        {"point-target", baselines::point_target_design(pb, sc.array, cfg.target, settings, backend.get())},
        {"trm-et", baselines::trm_et_design(pb, settings, backend.get())},
    };
    for (const auto& [name, sol] : baseline_runs) {
      if (sol.transmit_covariance.size() == 0) {
        out.add("dominance:" + name, true, 0.0, 0.0, "baseline " + design::to_string(sol.status));
        continue;
      }
      const design::VerificationReport rep = design::verify_solution(pb, sol);
      const bool ok = std::isfinite(proposed) && proposed <= rep.crb * (1.0 + 1e-6);
      out.add("dominance:" + name, ok, proposed, rep.crb * (1.0 + 1e-6),
              "proposed CRB vs baseline CRB " + fmt(rep.crb));
    }
  }

  report.checks = std::move(out.checks);
  return report;
}

}  // namespace nfet::validate
