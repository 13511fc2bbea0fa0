#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "nfet/types.hpp"

namespace nfet::conic {

enum class BlockKind { RealSymmetric, ComplexHermitian };

struct BlockSpec {
  BlockKind kind = BlockKind::ComplexHermitian;
  int dim = 0;
};

// Real-linear functionals of one PSD block variable X.

/// Re tr(C X); only the Hermitian part of C matters.
struct DenseTerm {
  CMat coeff;
};
/// weight * v^H X v
struct OuterTerm {
  CVec v;
  double weight = 1.0;
};
/// weight * tr X
struct TraceTerm {
  double weight = 1.0;
};
/// Re(conj(weight) * X_rc): weight 1 selects Re X_rc, weight i selects Im X_rc.
struct EntryTerm {
  int row = 0;
  int col = 0;
  cplx weight{1.0, 0.0};
};

struct Term {
  int block = 0;
  std::variant<DenseTerm, OuterTerm, TraceTerm, EntryTerm> functional;
};

enum class Sense { Equal, LessEqual, GreaterEqual };

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::Equal;
  double rhs = 0.0;
  std::string name;
};

/// minimize sum(objective) subject to constraints, every block PSD.
struct Problem {
  std::vector<BlockSpec> blocks;
  std::vector<Term> objective;
  std::vector<Constraint> constraints;

  int add_block(BlockKind kind, int dim) {
    blocks.push_back({kind, dim});
    return static_cast<int>(blocks.size()) - 1;
  }
};

struct Settings {
  double feasibility_tol = 1e-7;
  double gap_tol = 1e-7;
  int max_iterations = 500;
  bool verbose = false;
};

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations, NumericalError };

std::string to_string(Status s);

struct Solution {
  Status status = Status::NumericalError;
  std::vector<CMat> blocks;  // real blocks carry a zero imaginary part
  RVec duals;                // one multiplier per constraint
  RVec slacks;               // rhs - lhs for inequalities (sign-adjusted, >= 0), 0 for equalities
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;  // ||b - A(X)|| / (1 + ||b||)
  double dual_residual = 0.0;    // ||C - Z - A^T y|| / (1 + ||C||)
  double relative_gap = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
  long variable_entries = 0;  // sum of dim^2 over blocks
};

/// Value of a functional at a block value (complex Hermitian or real symmetric stored as complex).
double evaluate(const Term& term, const CMat& x);

/// Lhs of a constraint at a full set of block values.
double evaluate(const Constraint& c, const std::vector<CMat>& blocks);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual Solution solve(const Problem& problem, const Settings& settings) const = 0;
  virtual std::string name() const = 0;
};

/// Primal-dual path-following method on the real symmetric embedding
/// (HKM search direction, Mehrotra predictor-corrector, infeasible start).
///
/// A complex Hermitian block X of size n is carried as the real symmetric
/// matrix Y = [[Re X, -Im X], [Im X, Re X]] of size 2n. Y is PSD iff X is,
/// and Re tr(C X) = <embed(C), Y> / 2, so every coefficient on a Hermitian
/// block enters the real problem with a factor 1/2 and traces double.
class InteriorPointBackend final : public Backend {
 public:
  Solution solve(const Problem& problem, const Settings& settings) const override;
  std::string name() const override { return "hkm-ipm"; }
};

std::unique_ptr<Backend> make_default_backend();

RMat embed(const CMat& x);
CMat unembed(const RMat& y);

}  // namespace nfet::conic
