#include "nfet/baselines.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "nfet/error.hpp"
#include "nfet/subspace.hpp"

namespace nfet::baselines {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void record(const conic::Solution& cs, design::Diagnostics& diag) {
  diag.backend_status = cs.status;
  diag.iterations = cs.iterations;
  diag.primal_residual = cs.primal_residual;
  diag.dual_residual = cs.dual_residual;
  diag.relative_gap = cs.relative_gap;
}

// False (with status and message set) unless the backend converged.
bool accept(const conic::Solution& cs, design::DesignSolution& sol) {
  if (cs.status == conic::Status::Optimal) return true;
  if (cs.status == conic::Status::PrimalInfeasible) {
    sol.status = design::SolveStatus::Infeasible;
    sol.diagnostics.message = "backend reports primal infeasibility";
  } else {
    sol.status = design::SolveStatus::SolverFailure;
    std::ostringstream os;
    os << "backend status " << conic::to_string(cs.status) << " after " << cs.iterations
       << " iterations (primal residual " << cs.primal_residual << ", dual residual " << cs.dual_residual
       << ", gap " << cs.relative_gap << ")";
    sol.diagnostics.message = os.str();
  }
  return false;
}

bool sinr_reachable(const design::DesignProblem& pb, design::DesignSolution& sol, const conic::Backend* backend) {
  if (pb.num_users() == 0) return true;
  sol.diagnostics.min_sinr_power = design::min_power_for_sinr(pb.channels, pb.sinr_targets, pb.comm_noise, backend);
  if (sol.diagnostics.min_sinr_power > pb.power_budget * (1.0 + 1e-6)) {
    sol.status = design::SolveStatus::Infeasible;
    std::ostringstream os;
    os << "SINR targets need " << sol.diagnostics.min_sinr_power << " W, budget is " << pb.power_budget << " W";
    sol.diagnostics.message = os.str();
    return false;
  }
  return true;
}

}  // namespace

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Focus: return "focus";
    case BaselineKind::PointTarget: return "point-target";
    case BaselineKind::TrmEt: return "trm-et";
  }
  return "unknown";
}

design::DesignSolution focus_design(const design::DesignProblem& problem, const geometry::ArrayGeometry& array,
                                    const geometry::EtParams& eta) {
  problem.validate();
  const auto t0 = Clock::now();
  const int K = problem.num_users();
  const double P = problem.power_budget;
  const CVec ac = geometry::steering(array, {eta.x_c, eta.y_c});

  design::DesignSolution sol;
  sol.diagnostics.backend = "linear-solve";
  sol.diagnostics.variable_dim = K;
  sol.diagnostics.variable_entries = K;

  std::vector<CVec> u(K);
  for (int k = 0; k < K; ++k) u[k] = problem.channels[k].normalized();
  RVec p = RVec::Zero(K);
  if (K > 0) {
    // p_k g_kk = Gamma_k (sum_{j != k} p_j g_kj + p_0 c_k + sigma^2), p_0 = P - sum_j p_j.
    RMat a(K, K);
    RVec rhs(K);
    for (int k = 0; k < K; ++k) {
      const CVec& h = problem.channels[k];
      const double g = problem.sinr_targets[k];
      const double c = std::norm(h.dot(ac));
      for (int j = 0; j < K; ++j) {
        const double gkj = std::norm(h.dot(u[j]));
        a(k, j) = (j == k ? gkj : -g * gkj) + g * c;
      }
      rhs[k] = g * (problem.comm_noise + P * c);
    }
    Eigen::FullPivLU<RMat> lu(a);
    if (!lu.isInvertible()) {
      sol.status = design::SolveStatus::Infeasible;
      sol.diagnostics.message = "focus power system is singular";
      sol.diagnostics.solve_ms = ms_since(t0);
      return sol;
    }
    p = lu.solve(rhs);
  }
  const double p0 = P - p.sum();
  sol.diagnostics.solve_ms = ms_since(t0);
  if ((K > 0 && p.minCoeff() < 0.0) || p0 < 0.0) {
    sol.status = design::SolveStatus::Infeasible;
    std::ostringstream os;
    os << "focus powers infeasible (min user power " << (K > 0 ? p.minCoeff() : 0.0) << " W, sensing power " << p0
       << " W)";
    sol.diagnostics.message = os.str();
    return sol;
  }
  for (int k = 0; k < K; ++k) sol.comm_covariances.push_back(p[k] * u[k] * u[k].adjoint());
  sol.sensing_covariance = p0 * ac * ac.adjoint();
  sol.status = design::SolveStatus::Optimal;
  sol.diagnostics.backend_status = conic::Status::Optimal;
  design::finalize_solution(problem, sol);
  return sol;
}

design::DesignSolution point_target_design(const design::DesignProblem& problem,
                                           const geometry::ArrayGeometry& array, const geometry::EtParams& eta,
                                           const design::SolverSettings& settings, const conic::Backend* backend) {
  problem.validate();
  const geometry::EtPointCloud pc = geometry::point_cloud(eta.x_c, eta.y_c);
  design::DesignProblem pt = problem;
  pt.operators = std::make_shared<fisher::FisherOperators>(fisher::build_operators(pc, array));
  pt.basis = std::make_shared<subspace::SubspaceBasis>(
      subspace::build_subspace(problem.channels, pc, array, subspace::kExactSpanTolerance));

  design::DesignSolution sol = design::solve_reduced_sdr(pt, settings, backend);
  if (sol.transmit_covariance.size() == 0) return sol;
  // Score with the extended-target operators.
  sol.status = design::SolveStatus::Optimal;
  sol.diagnostics.message.clear();
  design::finalize_solution(problem, sol);
  if (sol.status == design::SolveStatus::Unidentifiable) {
    sol.diagnostics.message = "extended-target FIM is singular under the point-target covariance";
  }
  return sol;
}

design::DesignSolution trm_et_design(const design::DesignProblem& problem, const design::SolverSettings& settings,
                                     const conic::Backend* backend) {
  problem.validate();
  std::unique_ptr<conic::Backend> owned;
  if (!backend) {
    owned = conic::make_default_backend();
    backend = owned.get();
  }
  const int N = problem.num_elements();
  const int K = problem.num_users();
  const double P = problem.power_budget;

  design::DesignSolution sol;
  design::Diagnostics& diag = sol.diagnostics;
  diag.backend = backend->name();
  const auto t_asm = Clock::now();
  if (!sinr_reachable(problem, sol, backend)) {
    diag.assembly_ms = ms_since(t_asm);
    return sol;
  }

  subspace::SubspaceBasis span;
  std::vector<CVec> hb(K);
  int kh = 0;
  if (K > 0) {
    span = subspace::basis_from_generators(problem.channels, subspace::kExactSpanTolerance);
    kh = span.rank;
    for (int k = 0; k < K; ++k) hb[k] = subspace::reduce_vector(span, problem.channels[k]);
  }
  const int nperp = N - kh;
  diag.variable_dim = kh;
  diag.variable_entries = static_cast<long>(kh) * kh;

  // Blocks: X_1..X_K, X_0 (kh x kh), T = [A, I; I, Phi_a] (2 kh), s = [c, 1; 1, phi].
  conic::Problem prob;
  std::vector<int> xb;
  int tb = -1, sb = -1;
  if (kh > 0) {
    for (int k = 0; k <= K; ++k) xb.push_back(prob.add_block(conic::BlockKind::ComplexHermitian, kh));
    tb = prob.add_block(conic::BlockKind::ComplexHermitian, 2 * kh);
  }
  if (nperp > 0) sb = prob.add_block(conic::BlockKind::RealSymmetric, 2);

  const cplx re(1.0, 0.0), im(0.0, 1.0);
  for (int i = 0; i < kh; ++i) {
    for (int j = i; j < kh; ++j) {
      for (const cplx part : {re, im}) {
        if (i == j && part == im) continue;
        conic::Constraint c;
        c.sense = conic::Sense::Equal;
        c.terms.push_back({tb, conic::EntryTerm{i, j, part}});
        for (int b : xb) c.terms.push_back({b, conic::EntryTerm{i, j, -part}});
        prob.constraints.push_back(std::move(c));
      }
    }
  }
  for (int i = 0; i < kh; ++i) {
    for (int j = 0; j < kh; ++j) {
      for (const cplx part : {re, im}) {
        conic::Constraint c;
        c.sense = conic::Sense::Equal;
        c.rhs = (i == j && part == re) ? 1.0 : 0.0;
        c.terms.push_back({tb, conic::EntryTerm{i, kh + j, part}});
        prob.constraints.push_back(std::move(c));
      }
    }
  }
  if (sb >= 0) {
    conic::Constraint c;
    c.sense = conic::Sense::Equal;
    c.rhs = 1.0;
    c.terms.push_back({sb, conic::EntryTerm{0, 1, 1.0}});
    prob.constraints.push_back(std::move(c));
  }
  for (int k = 0; k < K; ++k) {
    const double g = problem.sinr_targets[k];
    const double nu = (1.0 + g) * hb[k].squaredNorm();
    conic::Constraint c;
    c.sense = conic::Sense::LessEqual;
    c.rhs = -g * problem.comm_noise / (P * nu);
    for (int j = 0; j <= K; ++j) c.terms.push_back({xb[j], conic::OuterTerm{hb[k], (j == k ? -1.0 : g) / nu}});
    prob.constraints.push_back(std::move(c));
  }
  conic::Constraint power;
  power.sense = conic::Sense::LessEqual;
  power.rhs = 1.0;
  for (int b : xb) power.terms.push_back({b, conic::TraceTerm{1.0}});
  if (sb >= 0) power.terms.push_back({sb, conic::EntryTerm{0, 0, static_cast<double>(nperp)}});
  prob.constraints.push_back(std::move(power));

  for (int i = 0; i < kh; ++i) prob.objective.push_back({tb, conic::EntryTerm{kh + i, kh + i, 1.0}});
  if (sb >= 0) prob.objective.push_back({sb, conic::EntryTerm{1, 1, static_cast<double>(nperp)}});
  diag.assembly_ms = ms_since(t_asm);

  const auto t_solve = Clock::now();
  conic::Settings cfg;
  cfg.feasibility_tol = settings.feasibility_tol;
  cfg.gap_tol = settings.gap_tol;
  cfg.max_iterations = settings.max_iterations;
  cfg.verbose = settings.verbose;
  conic::Solution cs = backend->solve(prob, cfg);
  if ((cs.status == conic::Status::MaxIterations || cs.status == conic::Status::NumericalError) &&
      settings.retry_loose) {
    diag.retried = true;
    cfg.feasibility_tol *= 10.0;
    cfg.gap_tol *= 10.0;
    cs = backend->solve(prob, cfg);
  }
  diag.solve_ms = ms_since(t_solve);
  record(cs, diag);
  if (!accept(cs, sol)) return sol;

  const double c = sb >= 0 ? cs.blocks[sb](0, 0).real() : 0.0;
  CMat perp = CMat::Identity(N, N);
  if (kh > 0) perp -= span.projector();
  for (int k = 0; k < K; ++k) sol.comm_covariances.push_back(P * subspace::lift(span, cs.blocks[xb[k]]));
  sol.sensing_covariance = P * c * perp;
  if (kh > 0) sol.sensing_covariance += P * subspace::lift(span, cs.blocks[xb[K]]);
  sol.sensing_covariance = hermitian_part(sol.sensing_covariance);
  sol.objective = cs.primal_objective / P;
  sol.status = design::SolveStatus::Optimal;
  if (diag.retried) diag.message = "converged after retry with 10x looser tolerances";
  design::finalize_solution(problem, sol);
  return sol;
}

}  // namespace nfet::baselines
