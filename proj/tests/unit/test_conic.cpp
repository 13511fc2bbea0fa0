#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "nfet/conic.hpp"

using namespace nfet;
using namespace nfet::conic;

namespace {

CMat random_hermitian(std::mt19937_64& rng, int n) {
  const CMat a = test::complex_gaussian(rng, n, n);
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_SUITE("conic") {

TEST_CASE("unit-trace Hermitian SDP finds the smallest eigenvalue") {
  std::mt19937_64 rng(31);
  for (int n : {2, 5, 8}) {
    const CMat c = random_hermitian(rng, n);
    Problem p;
    const int b = p.add_block(BlockKind::ComplexHermitian, n);
    p.objective.push_back({b, DenseTerm{c}});
    p.constraints.push_back({{{b, TraceTerm{1.0}}}, Sense::Equal, 1.0, "trace"});
    const Solution s = InteriorPointBackend().solve(p, {});
    REQUIRE(s.status == Status::Optimal);
    const double lmin = Eigen::SelfAdjointEigenSolver<CMat>(c).eigenvalues().minCoeff();
    CHECK(s.primal_objective == doctest::Approx(lmin).epsilon(1e-6));
    CHECK(s.dual_objective == doctest::Approx(lmin).epsilon(1e-6));
    CHECK(test::min_eig(s.blocks[b]) >= -1e-8);
  }
}

TEST_CASE("inequality form reaches the largest eigenvalue") {
  std::mt19937_64 rng(32);
  const CMat c = random_hermitian(rng, 4);
  Problem p;
  const int b = p.add_block(BlockKind::ComplexHermitian, 4);
  p.objective.push_back({b, DenseTerm{-c}});
  p.constraints.push_back({{{b, TraceTerm{1.0}}}, Sense::LessEqual, 2.0, "trace"});
  const Solution s = InteriorPointBackend().solve(p, {});
  REQUIRE(s.status == Status::Optimal);
  const double lmax = Eigen::SelfAdjointEigenSolver<CMat>(c).eigenvalues().maxCoeff();
  CHECK(s.primal_objective == doctest::Approx(-2.0 * std::max(lmax, 0.0)).epsilon(1e-6));
}

TEST_CASE("real 2x2 block with a fixed off-diagonal") {
  // min x11 + x22 s.t. x12 = 1, X >= 0 -> X = [1 1; 1 1].
  Problem p;
  const int b = p.add_block(BlockKind::RealSymmetric, 2);
  p.objective.push_back({b, EntryTerm{0, 0, 1.0}});
  p.objective.push_back({b, EntryTerm{1, 1, 1.0}});
  p.constraints.push_back({{{b, EntryTerm{0, 1, 1.0}}}, Sense::Equal, 1.0, "coupling"});
  const Solution s = InteriorPointBackend().solve(p, {});
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.primal_objective == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(s.blocks[b](0, 0).real() == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("outer-product constraint across two blocks") {
  // min tr X1 + tr X2 s.t. v^H X1 v >= 1, u^H X2 u >= 2 -> 1/|v|^2 + 2/|u|^2.
  std::mt19937_64 rng(33);
  const CVec v = test::complex_gaussian(rng, 3, 1), u = test::complex_gaussian(rng, 3, 1);
  Problem p;
  const int b1 = p.add_block(BlockKind::ComplexHermitian, 3);
  const int b2 = p.add_block(BlockKind::ComplexHermitian, 3);
  p.objective.push_back({b1, TraceTerm{1.0}});
  p.objective.push_back({b2, TraceTerm{1.0}});
  p.constraints.push_back({{{b1, OuterTerm{v, 1.0}}}, Sense::GreaterEqual, 1.0, "v"});
  p.constraints.push_back({{{b2, OuterTerm{u, 1.0}}}, Sense::GreaterEqual, 2.0, "u"});
  const Solution s = InteriorPointBackend().solve(p, {});
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.primal_objective == doctest::Approx(1.0 / v.squaredNorm() + 2.0 / u.squaredNorm()).epsilon(1e-6));
  CHECK(evaluate(p.constraints[0], s.blocks) >= 1.0 - 1e-6);
  CHECK(s.variable_entries == 18);
}

TEST_CASE("infeasible trace constraint is not reported optimal") {
  Problem p;
  const int b = p.add_block(BlockKind::ComplexHermitian, 3);
  p.objective.push_back({b, TraceTerm{1.0}});
  p.constraints.push_back({{{b, TraceTerm{1.0}}}, Sense::Equal, -1.0, "negative trace"});
  const Solution s = InteriorPointBackend().solve(p, {});
  CHECK(s.status != Status::Optimal);
  CHECK(s.status == Status::PrimalInfeasible);
}

TEST_CASE("functional evaluation") {
  CMat x(2, 2);
  x << cplx(2, 0), cplx(1, -3), cplx(1, 3), cplx(5, 0);
  CHECK(evaluate(Term{0, EntryTerm{0, 1, 1.0}}, x) == doctest::Approx(1.0));
  CHECK(evaluate(Term{0, EntryTerm{0, 1, cplx(0, 1)}}, x) == doctest::Approx(-3.0));
  CHECK(evaluate(Term{0, TraceTerm{2.0}}, x) == doctest::Approx(14.0));
  CVec v(2);
  v << 1.0, cplx(0, 1);
  CHECK(evaluate(Term{0, OuterTerm{v, 1.0}}, x) == doctest::Approx((v.adjoint() * x * v)(0).real()));
  CHECK(evaluate(Term{0, DenseTerm{CMat::Identity(2, 2)}}, x) == doctest::Approx(7.0));
}

TEST_CASE("real embedding preserves PSD-ness and doubles the spectrum") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 10; ++trial) {
    const CMat psd = test::random_psd(rng, 6);
    const RMat y = embed(psd);
    CHECK((y - y.transpose()).norm() == 0.0);
    CHECK(y.trace() == doctest::Approx(2.0 * psd.trace().real()));
    CHECK(Eigen::SelfAdjointEigenSolver<RMat>(y).eigenvalues().minCoeff() >= -1e-10);
    CHECK((unembed(y) - psd).norm() <= 1e-14);

    const CMat h = random_hermitian(rng, 6);
    const double lx = Eigen::SelfAdjointEigenSolver<CMat>(h).eigenvalues().minCoeff();
    const double ly = Eigen::SelfAdjointEigenSolver<RMat>(embed(h)).eigenvalues().minCoeff();
    CHECK(ly == doctest::Approx(lx).epsilon(1e-10));
  }
}

}  // TEST_SUITE
