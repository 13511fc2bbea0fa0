#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nfet/conic.hpp"
#include "nfet/fisher.hpp"
#include "nfet/subspace.hpp"
#include "nfet/types.hpp"

namespace nfet::design {

struct SolverSettings {
  double feasibility_tol = 1e-7;
  double gap_tol = 1e-7;
  int max_iterations = 500;
  // One retry with 10x looser tolerances when the first attempt does not converge.
  bool retry_loose = true;
  bool verbose = false;
};

/// Transmit design instance: users, budgets and the sensing operators of the
/// target the covariance is optimised for.
struct DesignProblem {
  std::vector<CVec> channels;
  std::vector<double> sinr_targets;  // linear
  double comm_noise = 1e-6;          // W
  fisher::SensingConfig sensing;
  double power_budget = 1.0;  // W
  std::shared_ptr<const fisher::FisherOperators> operators;
  std::shared_ptr<const subspace::SubspaceBasis> basis;  // used by solve_reduced_sdr

  int num_users() const { return static_cast<int>(channels.size()); }
  int num_elements() const { return operators ? operators->num_elements : 0; }
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unidentifiable, SolverFailure };

std::string to_string(SolveStatus s);

struct Diagnostics {
  std::string backend;
  conic::Status backend_status = conic::Status::NumericalError;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  double solve_ms = 0.0;     // backend call only
  double assembly_ms = 0.0;  // reduction + problem construction
  int variable_dim = 0;      // side of each covariance variable (N or r)
  long variable_entries = 0; // variable_dim^2
  bool retried = false;
  double min_sinr_power = 0.0;  // minimum power meeting the SINR targets alone
  std::string message;
};

struct DesignSolution {
  SolveStatus status = SolveStatus::SolverFailure;
  std::vector<CMat> comm_covariances;  // W_1..W_K
  CMat sensing_covariance;             // W_0
  CMat transmit_covariance;            // R_x
  RMat phi;                            // Schur auxiliary, >= J^-1
  double objective = std::numeric_limits<double>::quiet_NaN();  // tr(Phi)
  double crb = std::numeric_limits<double>::quiet_NaN();        // tr(J(R_x)^-1)
  std::vector<CVec> beams;             // rank-one recovery
  CMat recovered_sensing;              // W~_0
  bool recovered = false;
  Diagnostics diagnostics;

  bool ok() const { return status == SolveStatus::Optimal; }
};

/// Lifted SDR over N x N covariances.
DesignSolution solve_full_sdr(const DesignProblem& problem, const SolverSettings& settings = {},
                              const conic::Backend* backend = nullptr);

/// Same SDR over r x r covariances in problem.basis, lifted back to N x N.
DesignSolution solve_reduced_sdr(const DesignProblem& problem, const SolverSettings& settings = {},
                                 const conic::Backend* backend = nullptr);

struct RecoveredBeams {
  std::vector<CVec> beams;
  CMat sensing_covariance;
};

/// w_k = W_k h_k / sqrt(h_k^H W_k h_k), W~_0 = W_0 + sum_k (W_k - w_k w_k^H).
/// Throws DomainError naming the user when h_k^H W_k h_k <= 0.
RecoveredBeams rank_one_recovery(const std::vector<CMat>& comm, const CMat& sensing, const std::vector<CVec>& channels);

/// Fills beams / recovered_sensing of a solved design.
void apply_rank_one_recovery(DesignSolution& solution, const std::vector<CVec>& channels);

/// SINR of user k with beamformers.
double sinr(const CVec& h, int k, const std::vector<CVec>& beams, const CMat& sensing, double noise);
/// SINR of user k with communication covariances (|h^H w_j|^2 -> h^H W_j h).
double sinr(const CVec& h, int k, const std::vector<CMat>& covariances, const CMat& sensing, double noise);

/// Minimum total power meeting every SINR target with W_0 = 0 (+inf when unreachable).
double min_power_for_sinr(const std::vector<CVec>& channels, const std::vector<double>& targets, double noise,
                          const conic::Backend* backend = nullptr);

struct Tolerances {
  double power = 1e-6;      // relative to P_max
  double psd = 1e-7;        // min eigenvalue >= -psd * P_max
  double sinr = 1e-6;       // SINR >= Gamma (1 - sinr)
  double recovery = 1e-10;  // ||R~_x - R_x|| / ||R_x||
};

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::vector<Check> checks;
  double crb = std::numeric_limits<double>::infinity();
  RMat fim;
  bool identifiable = false;

  bool passed() const;
  std::string summary() const;
};

/// Recomputes power, PSD margins, SINRs, J and CRB from the covariances.
VerificationReport verify_solution(const DesignProblem& problem, const DesignSolution& solution,
                                   const Tolerances& tol = {});

/// CRB of R_x under the problem's operators (infinity when J is singular).
double evaluate_crb(const DesignProblem& problem, const CMat& rx);

/// Sets R_x and the CRB from the covariances, then applies rank-one recovery.
/// Marks the solution unidentifiable when J(R_x) is singular.
void finalize_solution(const DesignProblem& problem, DesignSolution& solution);

}  // namespace nfet::design
