#include "nfet/conic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nfet/error.hpp"
#include "nfet/simd/kernels.hpp"

namespace nfet::conic {

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal:
      return "optimal";
    case Status::PrimalInfeasible:
      return "primal_infeasible";
    case Status::DualInfeasible:
      return "dual_infeasible";
    case Status::MaxIterations:
      return "max_iterations";
    case Status::NumericalError:
      return "numerical_error";
  }
  return "unknown";
}

RMat embed(const CMat& x) {
  const Eigen::Index n = x.rows();
  RMat y(2 * n, 2 * n);
  y.topLeftCorner(n, n) = x.real();
  y.bottomRightCorner(n, n) = x.real();
  y.topRightCorner(n, n) = -x.imag();
  y.bottomLeftCorner(n, n) = x.imag();
  return y;
}

CMat unembed(const RMat& y) {
  const Eigen::Index n = y.rows() / 2;
  CMat x(n, n);
  x.real() = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  x.imag() = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  return hermitian_part(x);
}

double evaluate(const Term& term, const CMat& x) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, DenseTerm>) {
          return (f.coeff.cwiseProduct(x.transpose())).sum().real();
        } else if constexpr (std::is_same_v<T, OuterTerm>) {
          return f.weight * f.v.dot(x * f.v).real();
        } else if constexpr (std::is_same_v<T, TraceTerm>) {
          return f.weight * x.trace().real();
        } else {
          return (std::conj(f.weight) * x(f.row, f.col)).real();
        }
      },
      term.functional);
}

double evaluate(const Constraint& c, const std::vector<CMat>& blocks) {
  double s = 0.0;
  for (const Term& t : c.terms) s += evaluate(t, blocks.at(t.block));
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Trip {
  int r;
  int c;
  double v;
};

// One constraint's (or the objective's) coefficient on one real block.
struct RealTerm {
  enum Kind { Dense, LowRank, Trace, Sparse };
  int con = -1;
  Kind kind = Dense;
  RMat dense;
  RMat vecs;
  RVec wts;
  double trace_weight = 0.0;
  std::vector<Trip> trips;

  void scale(double s) {
    switch (kind) {
      case Dense:
        dense *= s;
        break;
      case LowRank:
        wts *= s;
        break;
      case Trace:
        trace_weight *= s;
        break;
      case Sparse:
        for (Trip& t : trips) t.v *= s;
        break;
    }
  }

  double norm2(Eigen::Index n) const {
    switch (kind) {
      case Dense:
        return dense.squaredNorm();
      case LowRank: {
        const RMat gram = vecs.transpose() * vecs;
        double s = 0.0;
        for (Eigen::Index i = 0; i < gram.rows(); ++i)
          for (Eigen::Index j = 0; j < gram.cols(); ++j) s += wts[i] * wts[j] * gram(i, j) * gram(i, j);
        return s;
      }
      case Trace:
        return trace_weight * trace_weight * static_cast<double>(n);
      case Sparse: {
        double s = 0.0;
        for (const Trip& t : trips) s += t.v * t.v;
        return s;
      }
    }
    return 0.0;
  }

  // <A, G> for a general (not necessarily symmetric) G.
  double inner(const RMat& g) const {
    switch (kind) {
      case Dense:
        return simd::dot(dense.data(), g.data(), static_cast<std::size_t>(g.size()));
      case LowRank: {
        double s = 0.0;
        for (Eigen::Index k = 0; k < vecs.cols(); ++k) s += wts[k] * vecs.col(k).dot(g * vecs.col(k));
        return s;
      }
      case Trace:
        return trace_weight * g.trace();
      case Sparse: {
        double s = 0.0;
        for (const Trip& t : trips) s += t.v * g(t.r, t.c);
        return s;
      }
    }
    return 0.0;
  }

  // out += alpha * A
  void accumulate(double alpha, RMat& out) const {
    switch (kind) {
      case Dense:
        simd::active().axpy(alpha, dense.data(), out.data(), static_cast<std::size_t>(out.size()));
        break;
      case LowRank:
        for (Eigen::Index k = 0; k < vecs.cols(); ++k)
          out.noalias() += (alpha * wts[k]) * vecs.col(k) * vecs.col(k).transpose();
        break;
      case Trace:
        out.diagonal().array() += alpha * trace_weight;
        break;
      case Sparse:
        for (const Trip& t : trips) out(t.r, t.c) += alpha * t.v;
        break;
    }
  }

  // X A Zinv
  RMat sandwich(const RMat& x, const RMat& zinv, const RMat& xzinv) const {
    switch (kind) {
      case Dense: {
        const RMat az = dense * zinv;
        return x * az;
      }
      case LowRank: {
        RMat g = RMat::Zero(x.rows(), x.cols());
        for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
          g.noalias() += wts[k] * (x * vecs.col(k)) * (zinv * vecs.col(k)).transpose();
        }
        return g;
      }
      case Trace:
        return trace_weight * xzinv;
      case Sparse: {
        RMat g = RMat::Zero(x.rows(), x.cols());
        for (const Trip& t : trips) g.noalias() += t.v * x.col(t.r) * zinv.row(t.c);
        return g;
      }
    }
    return {};
  }
};

struct RealBlock {
  Eigen::Index n = 0;
  bool hermitian = false;
  std::vector<RealTerm> terms;  // constraint terms
  RMat objective;
};

RealTerm lower(const Term& term, const BlockSpec& spec, int con) {
  RealTerm out;
  out.con = con;
  const bool herm = spec.kind == BlockKind::ComplexHermitian;
  const Eigen::Index n = spec.dim;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, DenseTerm>) {
          if (f.coeff.rows() != n || f.coeff.cols() != n) throw DimensionError("conic: dense term has wrong size");
          out.kind = RealTerm::Dense;
          if (herm) {
            out.dense = 0.5 * embed(hermitian_part(f.coeff));
          } else {
            const RMat re = f.coeff.real();
            out.dense = 0.5 * (re + re.transpose());
          }
        } else if constexpr (std::is_same_v<T, OuterTerm>) {
          if (f.v.size() != n) throw DimensionError("conic: outer term has wrong size");
          out.kind = RealTerm::LowRank;
          if (herm) {
            out.vecs.resize(2 * n, 2);
            out.vecs.col(0) << f.v.real(), f.v.imag();
            out.vecs.col(1) << -f.v.imag(), f.v.real();
            out.wts = RVec::Constant(2, 0.5 * f.weight);
          } else {
            out.vecs.resize(n, 2);
            out.vecs.col(0) = f.v.real();
            out.vecs.col(1) = f.v.imag();
            out.wts = RVec::Constant(2, f.weight);
          }
        } else if constexpr (std::is_same_v<T, TraceTerm>) {
          out.kind = RealTerm::Trace;
          out.trace_weight = herm ? 0.5 * f.weight : f.weight;
        } else {
          if (f.row < 0 || f.col < 0 || f.row >= n || f.col >= n) throw DimensionError("conic: entry out of range");
          out.kind = RealTerm::Sparse;
          // Hermitian coefficient C with C(col,row) = conj(w)/2, C(row,col) = w/2.
          std::vector<std::pair<std::pair<int, int>, cplx>> c;
          if (f.row == f.col) {
            c.push_back({{f.row, f.row}, cplx(f.weight.real(), 0.0)});
          } else {
            c.push_back({{f.col, f.row}, 0.5 * std::conj(f.weight)});
            c.push_back({{f.row, f.col}, 0.5 * f.weight});
          }
          const int nn = static_cast<int>(n);
          for (const auto& [ij, v] : c) {
            const auto [i, j] = ij;
            if (herm) {
              if (v.real() != 0.0) {
                out.trips.push_back({i, j, 0.5 * v.real()});
                out.trips.push_back({nn + i, nn + j, 0.5 * v.real()});
              }
              if (v.imag() != 0.0) {
                out.trips.push_back({i, nn + j, -0.5 * v.imag()});
                out.trips.push_back({nn + i, j, 0.5 * v.imag()});
              }
            } else if (v.real() != 0.0) {
              out.trips.push_back({i, j, v.real()});
            }
          }
        }
      },
      term.functional);
  return out;
}

// Largest step alpha with X + alpha dX PSD (infinity if unbounded).
double max_step(const RMat& x, const RMat& dx) {
  Eigen::LLT<RMat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const RMat t = llt.matrixL().solve(dx);
  RMat w = llt.matrixL().solve(t.transpose());
  w = 0.5 * (w + w.transpose()).eval();
  const double lmin = Eigen::SelfAdjointEigenSolver<RMat>(w, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step_lp(const RVec& x, const RVec& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx[i] < 0.0) a = std::min(a, -x[i] / dx[i]);
  return a;
}

class Ipm {
 public:
  Ipm(const Problem& p, const Settings& s) : settings_(s) { setup(p); }

  Solution run();

 private:
  struct Direction {
    std::vector<RMat> dx, dz;
    RVec dxl, dzl, dy;
  };

  void setup(const Problem& p);
  RVec apply_a(const std::vector<RMat>& x, const RVec& xl) const;
  void apply_at(const RVec& y, std::vector<RMat>& out, RVec& outl) const;
  Direction direction(double target, const Direction* predictor) const;
  RVec schur_solve(const RVec& rhs) const {
    return use_llt_ ? RVec(schur_llt_.solve(rhs)) : RVec(schur_.solve(rhs));
  }
  double inner(const std::vector<RMat>& a, const RVec& al, const std::vector<RMat>& b, const RVec& bl) const {
    double s = al.dot(bl);
    for (std::size_t k = 0; k < a.size(); ++k) s += simd::dot(a[k].data(), b[k].data(), a[k].size());
    return s;
  }

  Settings settings_;
  int m_ = 0;
  std::vector<RealBlock> blocks_;
  RVec b_;
  // LP part: one slack per inequality.
  std::vector<int> lp_con_;
  RVec lp_coef_;
  RVec row_scale_;
  double b_scale_ = 1.0, c_scale_ = 1.0;
  double n_total_ = 0.0;
  std::vector<Sense> senses_;

  // iterate
  std::vector<RMat> x_, z_, zinv_, xzinv_, rd_;
  RVec xl_, zl_, y_, rp_, rdl_;
  Eigen::LDLT<RMat> schur_;
  Eigen::LLT<RMat> schur_llt_;
  bool use_llt_ = true;
};

void Ipm::setup(const Problem& p) {
  m_ = static_cast<int>(p.constraints.size());
  blocks_.resize(p.blocks.size());
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const BlockSpec& spec = p.blocks[k];
    if (spec.dim < 1) throw DimensionError("conic: block dimension must be positive");
    blocks_[k].hermitian = spec.kind == BlockKind::ComplexHermitian;
    blocks_[k].n = blocks_[k].hermitian ? 2 * spec.dim : spec.dim;
    blocks_[k].objective = RMat::Zero(blocks_[k].n, blocks_[k].n);
  }
  auto check_block = [&](int b) {
    if (b < 0 || b >= static_cast<int>(blocks_.size())) throw DimensionError("conic: term refers to unknown block");
  };
  for (const Term& t : p.objective) {
    check_block(t.block);
    lower(t, p.blocks[t.block], -1).accumulate(1.0, blocks_[t.block].objective);
  }
  b_.resize(m_);
  RVec row_norm2 = RVec::Zero(m_);
  for (int i = 0; i < m_; ++i) {
    const Constraint& c = p.constraints[i];
    b_[i] = c.rhs;
    senses_.push_back(c.sense);
    for (const Term& t : c.terms) {
      check_block(t.block);
      RealTerm rt = lower(t, p.blocks[t.block], i);
      row_norm2[i] += rt.norm2(blocks_[t.block].n);
      blocks_[t.block].terms.push_back(std::move(rt));
    }
    if (c.sense != Sense::Equal) {
      lp_con_.push_back(i);
      const double coef = c.sense == Sense::LessEqual ? 1.0 : -1.0;
      lp_coef_.conservativeResize(lp_coef_.size() + 1);
      lp_coef_[lp_coef_.size() - 1] = coef;
      row_norm2[i] += 1.0;
    }
  }
  // row equilibration
  row_scale_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    if (row_norm2[i] == 0.0) throw DimensionError("conic: constraint " + p.constraints[i].name + " is empty");
    row_scale_[i] = 1.0 / std::sqrt(row_norm2[i]);
    b_[i] *= row_scale_[i];
  }
  for (RealBlock& blk : blocks_)
    for (RealTerm& t : blk.terms) t.scale(row_scale_[t.con]);
  for (Eigen::Index l = 0; l < lp_coef_.size(); ++l) lp_coef_[l] *= row_scale_[lp_con_[l]];

  b_scale_ = std::max(1.0, b_.norm());
  double cn2 = 0.0;
  for (const RealBlock& blk : blocks_) cn2 += blk.objective.squaredNorm();
  c_scale_ = std::max(1.0, std::sqrt(cn2));
  b_ /= b_scale_;
  for (RealBlock& blk : blocks_) blk.objective /= c_scale_;

  n_total_ = static_cast<double>(lp_coef_.size());
  for (const RealBlock& blk : blocks_) n_total_ += static_cast<double>(blk.n);
}

RVec Ipm::apply_a(const std::vector<RMat>& x, const RVec& xl) const {
  RVec out = RVec::Zero(m_);
  for (std::size_t k = 0; k < blocks_.size(); ++k)
    for (const RealTerm& t : blocks_[k].terms) out[t.con] += t.inner(x[k]);
  for (Eigen::Index l = 0; l < lp_coef_.size(); ++l) out[lp_con_[l]] += lp_coef_[l] * xl[l];
  return out;
}

void Ipm::apply_at(const RVec& y, std::vector<RMat>& out, RVec& outl) const {
  out.resize(blocks_.size());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    out[k] = RMat::Zero(blocks_[k].n, blocks_[k].n);
    for (const RealTerm& t : blocks_[k].terms) t.accumulate(y[t.con], out[k]);
  }
  outl.resize(lp_coef_.size());
  for (Eigen::Index l = 0; l < lp_coef_.size(); ++l) outl[l] = lp_coef_[l] * y[lp_con_[l]];
}

Ipm::Direction Ipm::direction(double target, const Direction* pred) const {
  const std::size_t nb = blocks_.size();
  // H = target Zinv - X - (X Rd + dXa dZa) Zinv
  std::vector<RMat> h(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    RMat t = x_[k] * rd_[k];
    if (pred != nullptr) t.noalias() += pred->dx[k] * pred->dz[k];
    h[k] = target * zinv_[k] - x_[k] - t * zinv_[k];
  }
  RVec hl(xl_.size());
  for (Eigen::Index l = 0; l < xl_.size(); ++l) {
    double t = xl_[l] * rdl_[l];
    if (pred != nullptr) t += pred->dxl[l] * pred->dzl[l];
    hl[l] = target / zl_[l] - xl_[l] - t / zl_[l];
  }
  const RVec rhs = rp_ - apply_a(h, hl);
  Direction d;
  d.dy = schur_solve(rhs);
  std::vector<RMat> aty;
  RVec atyl;
  apply_at(d.dy, aty, atyl);
  d.dz.resize(nb);
  d.dx.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    d.dz[k] = rd_[k] - aty[k];
    RMat t = x_[k] * d.dz[k];
    if (pred != nullptr) t.noalias() += pred->dx[k] * pred->dz[k];
    RMat dx = target * zinv_[k] - x_[k] - t * zinv_[k];
    d.dx[k] = 0.5 * (dx + dx.transpose());
  }
  d.dzl = rdl_ - atyl;
  d.dxl.resize(xl_.size());
  for (Eigen::Index l = 0; l < xl_.size(); ++l) {
    double t = xl_[l] * d.dzl[l];
    if (pred != nullptr) t += pred->dxl[l] * pred->dzl[l];
    d.dxl[l] = target / zl_[l] - xl_[l] - t / zl_[l];
  }
  // The assembled Schur matrix loses accuracy as mu -> 0; refine against the
  // exact operator so that A(dX) = rp holds to working precision.
  double last = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 12; ++pass) {
    const RVec r = rp_ - apply_a(d.dx, d.dxl);
    const double rn = r.norm();
    if (rn <= 1e-13 * (1.0 + rp_.norm()) || rn > 0.7 * last) break;
    last = rn;
    const RVec ddy = schur_solve(r);
    apply_at(ddy, aty, atyl);
    d.dy += ddy;
    for (std::size_t k = 0; k < nb; ++k) {
      d.dz[k] -= aty[k];
      const RMat c = x_[k] * aty[k] * zinv_[k];
      d.dx[k] += 0.5 * (c + c.transpose());
    }
    d.dzl -= atyl;
    for (Eigen::Index l = 0; l < xl_.size(); ++l) d.dxl[l] += xl_[l] * atyl[l] / zl_[l];
  }
  return d;
}

Solution Ipm::run() {
  const auto t0 = Clock::now();
  const std::size_t nb = blocks_.size();
  const Eigen::Index nl = lp_coef_.size();

  // Infeasible starting point, scaled with the data.
  x_.resize(nb);
  z_.resize(nb);
  std::vector<double> term_norm(m_, 0.0);
  for (std::size_t k = 0; k < nb; ++k) {
    const RealBlock& blk = blocks_[k];
    const double sn = std::sqrt(static_cast<double>(blk.n));
    double xi = std::max(10.0, sn), eta = std::max({10.0, sn, blk.objective.norm()});
    for (const RealTerm& t : blk.terms) {
      const double an = std::sqrt(t.norm2(blk.n));
      xi = std::max(xi, static_cast<double>(blk.n) * (1.0 + std::abs(b_[t.con])) / (1.0 + an));
      eta = std::max(eta, an);
    }
    x_[k] = xi * RMat::Identity(blk.n, blk.n);
    z_[k] = eta * RMat::Identity(blk.n, blk.n);
  }
  xl_ = RVec::Constant(nl, std::max(10.0, std::sqrt(static_cast<double>(nl))));
  zl_ = RVec::Constant(nl, std::max(10.0, std::sqrt(static_cast<double>(nl))));
  y_ = RVec::Zero(m_);

  Solution sol;
  sol.status = Status::MaxIterations;
  double gamma = 0.9;
  int stalls = 0;
  int it = 0;
  double pinf = 0, dinf = 0, relgap = 0, pobj = 0, dobj = 0;
  zinv_.resize(nb);
  xzinv_.resize(nb);
  rd_.resize(nb);
  struct Snapshot {
    std::vector<RMat> x, z;
    RVec xl, zl, y;
    double pinf, dinf, relgap, pobj, dobj;
    double merit = std::numeric_limits<double>::infinity();
  } best;
  int since_best = 0;
  double merit = std::numeric_limits<double>::infinity();
  for (; it <= settings_.max_iterations; ++it) {
    // residuals
    rp_ = b_ - apply_a(x_, xl_);
    std::vector<RMat> aty;
    RVec atyl;
    apply_at(y_, aty, atyl);
    double rdn2 = 0.0, cn2 = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      rd_[k] = blocks_[k].objective - z_[k] - aty[k];
      rdn2 += rd_[k].squaredNorm();
      cn2 += blocks_[k].objective.squaredNorm();
    }
    rdl_ = -zl_ - atyl;
    rdn2 += rdl_.squaredNorm();
    pobj = 0.0;
    for (std::size_t k = 0; k < nb; ++k)
      pobj += simd::dot(blocks_[k].objective.data(), x_[k].data(), x_[k].size());
    dobj = b_.dot(y_);
    const double mu = inner(x_, xl_, z_, zl_) / n_total_;
    pinf = rp_.norm() / (1.0 + b_.norm());
    dinf = std::sqrt(rdn2) / (1.0 + std::sqrt(cn2));
    relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (settings_.verbose) {
      std::fprintf(stderr, "%3d pobj %+.9e dobj %+.9e gap %.2e pinf %.2e dinf %.2e mu %.2e\n", it, pobj, dobj,
                   relgap, pinf, dinf, mu);
    }
    if (pinf <= settings_.feasibility_tol && dinf <= settings_.feasibility_tol && relgap <= settings_.gap_tol) {
      sol.status = Status::Optimal;
      break;
    }
    if (dobj > 1e10 && dinf <= settings_.feasibility_tol) {
      sol.status = Status::PrimalInfeasible;
      break;
    }
    if (-pobj > 1e10 && pinf <= settings_.feasibility_tol) {
      sol.status = Status::DualInfeasible;
      break;
    }
    merit = std::max({pinf / settings_.feasibility_tol, dinf / settings_.feasibility_tol, relgap / settings_.gap_tol});
    if (merit < 0.9 * best.merit) {
      best = {x_, z_, xl_, zl_, y_, pinf, dinf, relgap, pobj, dobj, merit};
      since_best = 0;
    } else if (++since_best >= 20) {
      sol.status = Status::NumericalError;
      break;
    }
    if (it == settings_.max_iterations) break;

    // Schur complement M_ij = <A_i, X A_j Zinv>
    RMat m = RMat::Zero(m_, m_);
    bool ok = true;
    for (std::size_t k = 0; k < nb && ok; ++k) {
      Eigen::LLT<RMat> llt(z_[k]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      zinv_[k] = llt.solve(RMat::Identity(blocks_[k].n, blocks_[k].n));
      zinv_[k] = 0.5 * (zinv_[k] + zinv_[k].transpose()).eval();
      xzinv_[k] = x_[k] * zinv_[k];
      const auto& terms = blocks_[k].terms;
      for (const RealTerm& tj : terms) {
        const RMat g = tj.sandwich(x_[k], zinv_[k], xzinv_[k]);
        for (const RealTerm& ti : terms) m(ti.con, tj.con) += ti.inner(g);
      }
    }
    if (!ok) {
      sol.status = Status::NumericalError;
      break;
    }
    for (Eigen::Index l = 0; l < nl; ++l)
      m(lp_con_[l], lp_con_[l]) += lp_coef_[l] * lp_coef_[l] * xl_[l] / zl_[l];
    m = 0.5 * (m + m.transpose()).eval();
    schur_llt_.compute(m);
    use_llt_ = schur_llt_.info() == Eigen::Success;
    if (!use_llt_) {
      const double reg = 1e-13 * std::max(1.0, m.diagonal().maxCoeff());
      schur_.compute(m + reg * RMat::Identity(m_, m_));
      if (schur_.info() != Eigen::Success) {
        sol.status = Status::NumericalError;
        break;
      }
    }

    // predictor
    const Direction pred = direction(0.0, nullptr);
    double ap = 1.0, ad = 1.0;
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, gamma * max_step(x_[k], pred.dx[k]));
      ad = std::min(ad, gamma * max_step(z_[k], pred.dz[k]));
    }
    ap = std::min(ap, gamma * max_step_lp(xl_, pred.dxl));
    ad = std::min(ad, gamma * max_step_lp(zl_, pred.dzl));
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      const RMat xa = x_[k] + ap * pred.dx[k];
      const RMat za = z_[k] + ad * pred.dz[k];
      mu_aff += simd::dot(xa.data(), za.data(), xa.size());
    }
    mu_aff += (xl_ + ap * pred.dxl).dot(zl_ + ad * pred.dzl);
    mu_aff /= n_total_;
    double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);
    // keep some centrality while far from feasibility
    if (std::max(pinf, dinf) > 1e-2) sigma = std::max(sigma, 0.1);

    // corrector
    const Direction d = direction(sigma * mu, &pred);
    ap = 1.0;
    ad = 1.0;
    for (std::size_t k = 0; k < nb; ++k) {
      ap = std::min(ap, gamma * max_step(x_[k], d.dx[k]));
      ad = std::min(ad, gamma * max_step(z_[k], d.dz[k]));
    }
    ap = std::min(ap, gamma * max_step_lp(xl_, d.dxl));
    ad = std::min(ad, gamma * max_step_lp(zl_, d.dzl));

    for (std::size_t k = 0; k < nb; ++k) {
      x_[k] += ap * d.dx[k];
      z_[k] += ad * d.dz[k];
      x_[k] = 0.5 * (x_[k] + x_[k].transpose()).eval();
      z_[k] = 0.5 * (z_[k] + z_[k].transpose()).eval();
    }
    xl_ += ap * d.dxl;
    zl_ += ad * d.dzl;
    y_ += ad * d.dy;
    if (settings_.verbose) std::fprintf(stderr, "    sigma %.2e step %.3f %.3f\n", sigma, ap, ad);
    gamma = 0.9 + 0.09 * std::min(ap, ad);
    if (std::max(ap, ad) < 1e-10) {
      if (++stalls >= 3) {
        sol.status = Status::NumericalError;
        break;
      }
    } else {
      stalls = 0;
    }
  }

  if (sol.status != Status::Optimal && sol.status != Status::PrimalInfeasible &&
      sol.status != Status::DualInfeasible && best.merit < merit) {
    x_ = best.x;
    z_ = best.z;
    xl_ = best.xl;
    zl_ = best.zl;
    y_ = best.y;
    pinf = best.pinf;
    dinf = best.dinf;
    relgap = best.relgap;
    pobj = best.pobj;
    dobj = best.dobj;
  }

  // unscale
  sol.iterations = it;
  sol.blocks.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const RMat xk = b_scale_ * x_[k];
    sol.blocks[k] = blocks_[k].hermitian ? unembed(xk) : CMat(xk.cast<cplx>());
    sol.variable_entries += (blocks_[k].hermitian ? blocks_[k].n / 2 : blocks_[k].n) *
                            (blocks_[k].hermitian ? blocks_[k].n / 2 : blocks_[k].n);
  }
  sol.duals = (c_scale_ * y_.array() * row_scale_.array()).matrix();
  sol.slacks = RVec::Zero(m_);
  for (Eigen::Index l = 0; l < nl; ++l) sol.slacks[lp_con_[l]] = b_scale_ * xl_[l];
  sol.primal_objective = b_scale_ * c_scale_ * pobj;
  sol.dual_objective = b_scale_ * c_scale_ * dobj;
  sol.primal_residual = pinf;
  sol.dual_residual = dinf;
  sol.relative_gap = relgap;
  sol.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return sol;
}

}  // namespace

Solution InteriorPointBackend::solve(const Problem& problem, const Settings& settings) const {
  Ipm ipm(problem, settings);
  return ipm.run();
}

std::unique_ptr<Backend> make_default_backend() { return std::make_unique<InteriorPointBackend>(); }

}  // namespace nfet::conic
