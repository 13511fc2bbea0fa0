#include "nfet/design.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>

#include "nfet/error.hpp"

namespace nfet::design {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double min_eigenvalue(const CMat& x) {
  if (x.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double quad(const CVec& h, const CMat& w) { return h.dot(w * h).real(); }

conic::Settings backend_settings(const SolverSettings& s, double loosen) {
  conic::Settings out;
  out.feasibility_tol = s.feasibility_tol * loosen;
  out.gap_tol = s.gap_tol * loosen;
  out.max_iterations = s.max_iterations;
  out.verbose = s.verbose;
  return out;
}

// Solve space of one SDR instance: full (basis == nullptr) or reduced.
struct Formulation {
  conic::Problem problem;
  int users = 0;
  int dim = 0;
  int params = 0;
  int schur_block = 0;
  RMat t;                 // parameter scaling, J' = T J~ T
  double fim_unit = 1.0;  // J = fim_unit * J~
};

struct Scaling {
  double qs = 1.0;  // largest ||Q_pq||_F
  RMat t;           // J' = T J~ T
};

// T = J~(R)^{-1/2} with J~ = J / (scale qs); J' = I at R.
std::optional<RMat> whitening(const fisher::FisherOperators& ops, const CMat& rx, double qs, double* cond = nullptr) {
  const int D = ops.num_params;
  RMat j(D, D);
  for (int p = 0; p < D; ++p)
    for (int q = p; q < D; ++q) j(p, q) = j(q, p) = fisher::trace_product(ops.q(p, q), rx) / qs;
  Eigen::SelfAdjointEigenSolver<RMat> es(j);
  const RVec& lam = es.eigenvalues();
  if (cond) *cond = lam(D - 1) / lam(0);
  if (es.info() != Eigen::Success || !(lam(0) > 1e-14 * lam(D - 1))) return std::nullopt;
  return RMat(es.eigenvectors() * lam.array().rsqrt().matrix().asDiagonal() * es.eigenvectors().transpose());
}

// Q normalised by its largest Frobenius norm, parameters whitened at the
// isotropic covariance I / N (which excites every direction any R_x can).
Scaling default_scaling(const fisher::FisherOperators& ops) {
  const int D = ops.num_params;
  const int N = ops.num_elements;
  Scaling sc;
  sc.qs = 0.0;
  for (int p = 0; p < D; ++p)
    for (int q = 0; q < D; ++q) sc.qs = std::max(sc.qs, ops.q(p, q).norm());
  double cond = 0.0;
  std::optional<RMat> t;
  if (sc.qs > 0.0) t = whitening(ops, CMat::Identity(N, N) / static_cast<double>(N), sc.qs, &cond);
  if (!t) {
    std::ostringstream os;
    os << "the geometric parameters are not identifiable under any covariance (isotropic FIM condition " << cond
       << ")";
    throw SingularFimError(os.str(), 0.0, cond);
  }
  sc.t = *t;
  return sc;
}

Formulation build_formulation(const DesignProblem& pb, const subspace::SubspaceBasis* basis, const Scaling& sc) {
  const fisher::FisherOperators& ops = *pb.operators;
  const int D = ops.num_params;
  const int N = ops.num_elements;
  const int K = pb.num_users();

  fisher::FisherOperators reduced;
  const fisher::FisherOperators* q_ops = &ops;
  std::vector<CVec> h(pb.channels);
  int n = N;
  if (basis) {
    reduced = subspace::reduce_q(*basis, ops);
    q_ops = &reduced;
    for (auto& v : h) v = subspace::reduce_vector(*basis, v);
    n = basis->rank;
  }

  Formulation f;
  f.users = K;
  f.dim = n;
  f.params = D;
  f.t = sc.t;
  f.fim_unit = pb.sensing.scale() * sc.qs * pb.power_budget;

  conic::Problem& prob = f.problem;
  // Blocks 0..K-1: W_1..W_K, block K: W_0, all divided by P_max.
  for (int k = 0; k <= K; ++k) prob.add_block(conic::BlockKind::ComplexHermitian, n);
  f.schur_block = prob.add_block(conic::BlockKind::RealSymmetric, 2 * D);
  const int S = f.schur_block;

  // Upper-left of the Schur block equals the scaled FIM T J~ T.
  for (int p = 0; p < D; ++p) {
    for (int q = p; q < D; ++q) {
      conic::Constraint c;
      c.sense = conic::Sense::Equal;
      c.rhs = 0.0;
      c.name = "fim(" + std::to_string(p) + "," + std::to_string(q) + ")";
      CMat coeff = CMat::Zero(n, n);
      for (int a = 0; a < D; ++a) {
        for (int b = 0; b < D; ++b) {
          const double w = f.t(p, a) * f.t(q, b);
          if (w != 0.0) coeff -= (w / sc.qs) * q_ops->q(a, b);
        }
      }
      for (int k = 0; k <= K; ++k) c.terms.push_back({k, conic::DenseTerm{coeff}});
      c.terms.push_back({S, conic::EntryTerm{p, q, 1.0}});
      prob.constraints.push_back(std::move(c));
    }
  }
  // Off-diagonal block is the identity.
  for (int p = 0; p < D; ++p) {
    for (int q = 0; q < D; ++q) {
      conic::Constraint c;
      c.sense = conic::Sense::Equal;
      c.rhs = p == q ? 1.0 : 0.0;
      c.name = "coupling(" + std::to_string(p) + "," + std::to_string(q) + ")";
      c.terms.push_back({S, conic::EntryTerm{p, D + q, 1.0}});
      prob.constraints.push_back(std::move(c));
    }
  }
  // Gamma_k (sum_{j != k} h^H W_j h + h^H W_0 h + sigma^2) <= h^H W_k h, row scaled.
  for (int k = 0; k < K; ++k) {
    const double g = pb.sinr_targets[k];
    const double nu = (1.0 + g) * h[k].squaredNorm();
    conic::Constraint c;
    c.sense = conic::Sense::LessEqual;
    c.rhs = -g * pb.comm_noise / (pb.power_budget * nu);
    c.name = "sinr" + std::to_string(k + 1);
    for (int j = 0; j <= K; ++j) c.terms.push_back({j, conic::OuterTerm{h[k], (j == k ? -1.0 : g) / nu}});
    prob.constraints.push_back(std::move(c));
  }
  conic::Constraint power;
  power.sense = conic::Sense::LessEqual;
  power.rhs = 1.0;
  power.name = "power";
  for (int k = 0; k <= K; ++k) power.terms.push_back({k, conic::TraceTerm{1.0}});
  prob.constraints.push_back(std::move(power));

  // tr(J~^-1) = tr(T Phi' T)
  const RMat t2 = f.t * f.t;
  for (int p = 0; p < D; ++p) {
    for (int q = p; q < D; ++q) {
      const double w = p == q ? t2(p, p) : 2.0 * t2(p, q);
      if (w != 0.0) prob.objective.push_back({S, conic::EntryTerm{D + p, D + q, w}});
    }
  }
  return f;
}

DesignSolution solve_sdr(const DesignProblem& pb, const subspace::SubspaceBasis* basis, const SolverSettings& settings,
                         const conic::Backend* backend) {
  pb.validate();
  std::unique_ptr<conic::Backend> owned;
  if (!backend) {
    owned = conic::make_default_backend();
    backend = owned.get();
  }
  const int N = pb.num_elements();
  const int K = pb.num_users();

  DesignSolution sol;
  Diagnostics& diag = sol.diagnostics;
  diag.backend = backend->name();
  diag.variable_dim = basis ? basis->rank : N;
  diag.variable_entries = static_cast<long>(diag.variable_dim) * diag.variable_dim;

  const auto t_asm = Clock::now();
  if (K > 0) {
    diag.min_sinr_power = min_power_for_sinr(pb.channels, pb.sinr_targets, pb.comm_noise, backend);
    if (diag.min_sinr_power > pb.power_budget * (1.0 + 1e-6)) {
      sol.status = SolveStatus::Infeasible;
      std::ostringstream os;
      os << "SINR targets need " << diag.min_sinr_power << " W, budget is " << pb.power_budget << " W";
      diag.message = os.str();
      diag.assembly_ms = ms_since(t_asm);
      return sol;
    }
  }

  Scaling sc;
  try {
    sc = default_scaling(*pb.operators);
  } catch (const SingularFimError& e) {
    sol.status = SolveStatus::Unidentifiable;
    diag.message = e.what();
    diag.assembly_ms = ms_since(t_asm);
    return sol;
  }
  Formulation f = build_formulation(pb, basis, sc);
  diag.assembly_ms = ms_since(t_asm);

  // A coarse solve locates the optimum well enough to whiten the parameters
  // there; the Schur block is then close to [I, I; I, I] near convergence.
  auto t_solve = Clock::now();
  conic::Settings coarse = backend_settings(settings, 1.0);
  coarse.feasibility_tol = coarse.gap_tol = 1e-3;
  conic::Solution cs = backend->solve(f.problem, coarse);
  diag.solve_ms = ms_since(t_solve);
  if (cs.status == conic::Status::Optimal) {
    CMat rx = CMat::Zero(N, N);
    for (int k = 0; k <= K; ++k) rx += basis ? subspace::lift(*basis, cs.blocks[k]) : hermitian_part(cs.blocks[k]);
    if (auto t = whitening(*pb.operators, rx, sc.qs)) {
      const auto t_re = Clock::now();
      sc.t = *t;
      f = build_formulation(pb, basis, sc);
      diag.assembly_ms += ms_since(t_re);
    }
  }

  t_solve = Clock::now();
  if (cs.status != conic::Status::PrimalInfeasible) {
    cs = backend->solve(f.problem, backend_settings(settings, 1.0));
    const bool retryable = cs.status == conic::Status::MaxIterations || cs.status == conic::Status::NumericalError;
    if (retryable && settings.retry_loose) {
      diag.retried = true;
      cs = backend->solve(f.problem, backend_settings(settings, 10.0));
    }
  }
  diag.solve_ms += ms_since(t_solve);
  diag.backend_status = cs.status;
  diag.iterations = cs.iterations;
  diag.primal_residual = cs.primal_residual;
  diag.dual_residual = cs.dual_residual;
  diag.relative_gap = cs.relative_gap;

  if (cs.status == conic::Status::PrimalInfeasible) {
    sol.status = SolveStatus::Infeasible;
    diag.message = "backend reports primal infeasibility";
    return sol;
  }
  if (cs.status != conic::Status::Optimal) {
    sol.status = SolveStatus::SolverFailure;
    std::ostringstream os;
    os << "backend status " << conic::to_string(cs.status) << " after " << cs.iterations
       << " iterations (primal residual " << cs.primal_residual << ", dual residual " << cs.dual_residual
       << ", gap " << cs.relative_gap << ")";
    diag.message = os.str();
    return sol;
  }

  auto to_ambient = [&](const CMat& x) -> CMat {
    CMat w = basis ? subspace::lift(*basis, x) : hermitian_part(x);
    return pb.power_budget * w;
  };
  sol.comm_covariances.reserve(K);
  for (int k = 0; k < K; ++k) sol.comm_covariances.push_back(to_ambient(cs.blocks[k]));
  sol.sensing_covariance = to_ambient(cs.blocks[K]);

  const int D = f.params;
  const RMat s_block = cs.blocks[f.schur_block].real();
  sol.phi = f.t * s_block.bottomRightCorner(D, D) * f.t / f.fim_unit;
  sol.objective = cs.primal_objective / f.fim_unit;
  sol.status = SolveStatus::Optimal;
  if (diag.retried) diag.message = "converged after retry with 10x looser tolerances";
  finalize_solution(pb, sol);
  return sol;
}

}  // namespace

void DesignProblem::validate() const {
  if (!operators || !operators->has_q()) throw DimensionError("design problem needs Fisher operators with the Q grid");
  const int N = operators->num_elements;
  if (sinr_targets.size() != channels.size()) throw DimensionError("one SINR target per channel required");
  for (const CVec& h : channels) {
    if (h.size() != N) throw DimensionError("channel length differs from the array size");
  }
  for (double g : sinr_targets) {
    if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("SINR targets must be positive and finite");
  }
  if (!(power_budget > 0.0) || !std::isfinite(power_budget)) throw DomainError("power budget must be positive");
  if (!(comm_noise > 0.0)) throw DomainError("communication noise power must be positive");
  if (sensing.snapshots < 1 || !(sensing.noise_power > 0.0)) throw DomainError("invalid sensing configuration");
  if (basis && basis->ambient_dim() != N) throw DimensionError("subspace basis does not match the array size");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unidentifiable: return "unidentifiable";
    case SolveStatus::SolverFailure: return "solver-failure";
  }
  return "unknown";
}

DesignSolution solve_full_sdr(const DesignProblem& problem, const SolverSettings& settings,
                              const conic::Backend* backend) {
  return solve_sdr(problem, nullptr, settings, backend);
}

DesignSolution solve_reduced_sdr(const DesignProblem& problem, const SolverSettings& settings,
                                 const conic::Backend* backend) {
  if (!problem.basis) throw DimensionError("reduced SDR needs a subspace basis");
  return solve_sdr(problem, problem.basis.get(), settings, backend);
}

RecoveredBeams rank_one_recovery(const std::vector<CMat>& comm, const CMat& sensing,
                                 const std::vector<CVec>& channels) {
  if (comm.size() != channels.size()) throw DimensionError("one covariance per channel required");
  RecoveredBeams out;
  out.sensing_covariance = sensing;
  out.beams.reserve(comm.size());
  for (std::size_t k = 0; k < comm.size(); ++k) {
    const CVec wh = comm[k] * channels[k];
    const double useful = channels[k].dot(wh).real();
    if (!(useful > 0.0)) {
      throw DomainError("rank-one recovery: user " + std::to_string(k + 1) + " receives no useful power");
    }
    CVec w = wh / std::sqrt(useful);
    out.sensing_covariance += comm[k] - w * w.adjoint();
    out.beams.push_back(std::move(w));
  }
  out.sensing_covariance = hermitian_part(out.sensing_covariance);
  return out;
}

void apply_rank_one_recovery(DesignSolution& solution, const std::vector<CVec>& channels) {
  RecoveredBeams r = rank_one_recovery(solution.comm_covariances, solution.sensing_covariance, channels);
  solution.beams = std::move(r.beams);
  solution.recovered_sensing = std::move(r.sensing_covariance);
  solution.recovered = true;
}

double sinr(const CVec& h, int k, const std::vector<CVec>& beams, const CMat& sensing, double noise) {
  double useful = 0.0;
  double interference = quad(h, sensing) + noise;
  for (std::size_t j = 0; j < beams.size(); ++j) {
    const double g = std::norm(h.dot(beams[j]));
    if (static_cast<int>(j) == k) useful = g;
    else interference += g;
  }
  return useful / interference;
}

double sinr(const CVec& h, int k, const std::vector<CMat>& covariances, const CMat& sensing, double noise) {
  double useful = 0.0;
  double interference = quad(h, sensing) + noise;
  for (std::size_t j = 0; j < covariances.size(); ++j) {
    const double g = quad(h, covariances[j]);
    if (static_cast<int>(j) == k) useful = g;
    else interference += g;
  }
  return useful / interference;
}

double min_power_for_sinr(const std::vector<CVec>& channels, const std::vector<double>& targets, double noise,
                          const conic::Backend* backend) {
  const int K = static_cast<int>(channels.size());
  if (K == 0) return 0.0;
  if (static_cast<int>(targets.size()) != K) throw DimensionError("one SINR target per channel required");
  std::unique_ptr<conic::Backend> owned;
  if (!backend) {
    owned = conic::make_default_backend();
    backend = owned.get();
  }
  // Optimal communication covariances lie in span(H).
  const subspace::SubspaceBasis span = subspace::basis_from_generators(channels, subspace::kExactSpanTolerance);
  double unit = 0.0;
  std::vector<CVec> h(K);
  for (int k = 0; k < K; ++k) {
    h[k] = subspace::reduce_vector(span, channels[k]);
    unit = std::max(unit, targets[k] * noise / channels[k].squaredNorm());
  }
  conic::Problem prob;
  for (int k = 0; k < K; ++k) {
    prob.add_block(conic::BlockKind::ComplexHermitian, span.rank);
    prob.objective.push_back({k, conic::TraceTerm{1.0}});
  }
  for (int k = 0; k < K; ++k) {
    const double nu = (1.0 + targets[k]) * h[k].squaredNorm();
    conic::Constraint c;
    c.sense = conic::Sense::LessEqual;
    c.rhs = -targets[k] * noise / (unit * nu);
    for (int j = 0; j < K; ++j) c.terms.push_back({j, conic::OuterTerm{h[k], (j == k ? -1.0 : targets[k]) / nu}});
    prob.constraints.push_back(std::move(c));
  }
  const conic::Solution s = backend->solve(prob, conic::Settings{});
  if (s.status == conic::Status::PrimalInfeasible) return std::numeric_limits<double>::infinity();
  if (s.status != conic::Status::Optimal) return std::numeric_limits<double>::quiet_NaN();
  return unit * s.primal_objective;
}

void finalize_solution(const DesignProblem& problem, DesignSolution& solution) {
  const int N = problem.num_elements();
  solution.transmit_covariance = solution.sensing_covariance.size() ? solution.sensing_covariance : CMat::Zero(N, N);
  for (const CMat& w : solution.comm_covariances) solution.transmit_covariance += w;
  solution.crb = evaluate_crb(problem, solution.transmit_covariance);
  if (!std::isfinite(solution.crb)) {
    solution.status = SolveStatus::Unidentifiable;
    solution.diagnostics.message = "FIM of the designed covariance is singular";
    return;
  }
  try {
    apply_rank_one_recovery(solution, problem.channels);
  } catch (const DomainError& e) {
    solution.diagnostics.message = e.what();
  }
}

double evaluate_crb(const DesignProblem& problem, const CMat& rx) {
  try {
    return fisher::crb(fisher::fim(*problem.operators, rx, problem.sensing)).value;
  } catch (const SingularFimError&) {
    return std::numeric_limits<double>::infinity();
  }
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string VerificationReport::summary() const {
  std::ostringstream os;
  for (const Check& c : checks) {
    os << (c.passed ? "ok   " : "FAIL ") << c.name << " value=" << c.value << " limit=" << c.limit;
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << '\n';
  }
  os << "crb=" << crb << '\n';
  return os.str();
}

VerificationReport verify_solution(const DesignProblem& problem, const DesignSolution& solution,
                                   const Tolerances& tol) {
  VerificationReport rep;
  const int K = problem.num_users();
  const double P = problem.power_budget;
  auto add = [&](std::string name, bool ok, double value, double limit, std::string detail = {}) {
    rep.checks.push_back({std::move(name), ok, value, limit, std::move(detail)});
  };

  if (static_cast<int>(solution.comm_covariances.size()) != K || solution.sensing_covariance.size() == 0) {
    add("structure", false, static_cast<double>(solution.comm_covariances.size()), K, "missing covariances");
    return rep;
  }

  CMat rx = solution.sensing_covariance;
  for (const CMat& w : solution.comm_covariances) rx += w;

  const double power = rx.trace().real();
  add("power", power <= P * (1.0 + tol.power), power, P * (1.0 + tol.power));

  auto herm_check = [&](const std::string& name, const CMat& x) {
    const double nx = x.norm();
    const double dev = nx > 0.0 ? (x - x.adjoint()).norm() / nx : 0.0;
    add("hermitian:" + name, dev <= 1e-10, dev, 1e-10);
  };
  auto psd_check = [&](const std::string& name, const CMat& x, double rel) {
    const double lam = min_eigenvalue(x);
    add("psd:" + name, lam >= -rel * P, lam, -rel * P);
  };
  for (int k = 0; k < K; ++k) {
    herm_check("W" + std::to_string(k + 1), solution.comm_covariances[k]);
    psd_check("W" + std::to_string(k + 1), solution.comm_covariances[k], tol.psd);
  }
  herm_check("W0", solution.sensing_covariance);
  psd_check("W0", solution.sensing_covariance, tol.psd);

  for (int k = 0; k < K; ++k) {
    const double g = sinr(problem.channels[k], k, solution.comm_covariances, solution.sensing_covariance,
                          problem.comm_noise);
    const double ratio = g / problem.sinr_targets[k];
    add("sinr:user" + std::to_string(k + 1), ratio >= 1.0 - tol.sinr, ratio, 1.0 - tol.sinr, "achieved / target");
  }

  try {
    rep.fim = fisher::fim(*problem.operators, rx, problem.sensing);
    const fisher::CrbResult c = fisher::crb(rep.fim);
    rep.crb = c.value;
    rep.identifiable = true;
    add("fim", true, c.condition, fisher::kMaxFimCondition, "condition number");
  } catch (const SingularFimError& e) {
    rep.crb = std::numeric_limits<double>::infinity();
    add("fim", false, e.condition(), fisher::kMaxFimCondition, e.what());
  }

  if (solution.recovered && K > 0) {
    if (static_cast<int>(solution.beams.size()) != K) {
      add("recovery", false, static_cast<double>(solution.beams.size()), K, "beam count");
      return rep;
    }
    CMat rt = solution.recovered_sensing;
    for (const CVec& w : solution.beams) rt += w * w.adjoint();
    const double drift = (rt - rx).norm() / std::max(rx.norm(), 1e-300);
    add("recovery:rx", drift <= tol.recovery, drift, tol.recovery, "relative Frobenius change of R_x");
    psd_check("W0~", solution.recovered_sensing, 1e-9);
    for (int k = 0; k < K; ++k) {
      const CVec& h = problem.channels[k];
      const double own = quad(h, solution.comm_covariances[k]);
      const double got = std::norm(h.dot(solution.beams[k]));
      const double dev = std::abs(got - own) / std::max(own, 1e-300);
      add("useful:user" + std::to_string(k + 1), dev <= tol.recovery, dev, tol.recovery,
          "|h^H w|^2 vs h^H W h");
      const double g = sinr(h, k, solution.beams, solution.recovered_sensing, problem.comm_noise);
      const double ratio = g / problem.sinr_targets[k];
      add("sinr~:user" + std::to_string(k + 1), ratio >= 1.0 - tol.sinr, ratio, 1.0 - tol.sinr,
          "after recovery");
    }
    if (rep.identifiable) {
      const double crb_t = evaluate_crb(problem, rt);
      const double dev = std::abs(crb_t - rep.crb) / rep.crb;
      add("crb~", dev <= 1e-6, dev, 1e-6, "relative CRB change after recovery");
    }
  }
  return rep;
}

}  // namespace nfet::design
