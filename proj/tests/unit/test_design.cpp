#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "nfet/baselines.hpp"
#include "nfet/design.hpp"
#include "nfet/error.hpp"

using namespace nfet;
using namespace nfet::design;

namespace {

bool check_passed(const VerificationReport& rep, const std::string& name) {
  for (const Check& c : rep.checks) {
    if (c.name == name) return c.passed;
  }
  FAIL("missing check " << name);
  return false;
}

}  // namespace

TEST_SUITE("design") {

TEST_CASE("SINR closed forms") {
  std::mt19937_64 rng(41);
  const CVec h = test::complex_gaussian(rng, 6, 1);
  const double p = 0.3, noise = 1e-3;
  const CVec w = std::sqrt(p) * h / h.norm();
  CHECK(sinr(h, 0, std::vector<CVec>{w}, CMat::Zero(6, 6), noise) == doctest::Approx(p * h.squaredNorm() / noise));
  CHECK(sinr(h, 0, std::vector<CVec>{CVec::Zero(6)}, CMat::Zero(6, 6), noise) == 0.0);

  const std::vector<CVec> beams{test::complex_gaussian(rng, 6, 1), test::complex_gaussian(rng, 6, 1),
                                test::complex_gaussian(rng, 6, 1)};
  std::vector<CMat> covs;
  for (const CVec& b : beams) covs.push_back(b * b.adjoint());
  const CMat w0 = test::random_psd(rng, 6);
  for (int k = 0; k < 3; ++k) {
    const double a = sinr(h, k, beams, w0, noise), b = sinr(h, k, covs, w0, noise);
    CHECK(std::abs(a - b) <= 1e-12 * a);
  }
}

TEST_CASE("rank-one recovery keeps R_x and the useful power") {
  std::mt19937_64 rng(42);
  const int n = 8;
  const std::vector<CVec> h{test::complex_gaussian(rng, n, 1), test::complex_gaussian(rng, n, 1)};
  const std::vector<CMat> w{test::random_psd(rng, n, 3), test::random_psd(rng, n, 2)};
  const CMat w0 = test::random_psd(rng, n, 1);
  const RecoveredBeams rb = rank_one_recovery(w, w0, h);
  const CMat rx = w[0] + w[1] + w0;
  const CMat rx2 = rb.beams[0] * rb.beams[0].adjoint() + rb.beams[1] * rb.beams[1].adjoint() + rb.sensing_covariance;
  CHECK((rx2 - rx).norm() <= 1e-10 * rx.norm());
  for (int k = 0; k < 2; ++k) {
    CHECK(std::norm(h[k].dot(rb.beams[k])) == doctest::Approx(h[k].dot(w[k] * h[k]).real()).epsilon(1e-12));
  }
  CHECK(test::min_eig(rb.sensing_covariance) >= -1e-12 * rx.norm());

  // Applying it to its own output changes nothing.
  std::vector<CMat> rank_one;
  for (const CVec& b : rb.beams) rank_one.push_back(b * b.adjoint());
  const RecoveredBeams again = rank_one_recovery(rank_one, rb.sensing_covariance, h);
  for (int k = 0; k < 2; ++k) {
    CHECK((again.beams[k] * again.beams[k].adjoint() - rank_one[k]).norm() <= 1e-12 * rank_one[k].norm());
  }
  CHECK((again.sensing_covariance - rb.sensing_covariance).norm() <= 1e-12 * rx.norm());
}

TEST_CASE("recovery names the user without useful power") {
  const CVec h = CVec::Unit(4, 0);
  const CVec other = CVec::Unit(4, 1);
  try {
    rank_one_recovery({other * other.adjoint()}, CMat::Zero(4, 4), {h});
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("user 1") != std::string::npos);
  }
}

TEST_CASE("reduced and full SDR agree and pass verification") {
  for (int n : {8, 12, 16}) {
    const config::Scenario sc = test::small_scenario(n);
    const DesignSolution full = solve_full_sdr(sc.problem);
    const DesignSolution red = solve_reduced_sdr(sc.problem);
    REQUIRE(full.ok());
    REQUIRE(red.ok());
    CHECK(test::rel(red.objective, full.objective) <= 1e-4);
    CHECK(red.diagnostics.variable_dim == sc.problem.basis->rank);
    CHECK(full.diagnostics.variable_dim == n);
    for (const auto* s : {&full, &red}) {
      const VerificationReport rep = verify_solution(sc.problem, *s);
      CHECK_MESSAGE(rep.passed(), rep.summary());
      CHECK(s->recovered);
      CHECK(test::rel(rep.crb, s->crb) <= 1e-10);
      CHECK(test::rel(s->objective, s->crb) <= 1e-5);
    }
  }
}

TEST_CASE("reduced SDR needs a basis") {
  config::Scenario sc = test::small_scenario(8);
  sc.problem.basis.reset();
  CHECK_THROWS_AS(solve_reduced_sdr(sc.problem), DimensionError);
}

TEST_CASE("verification flags a budget overrun of 1 percent") {
  const config::Scenario sc = test::small_scenario(8);
  DesignSolution s = solve_reduced_sdr(sc.problem);
  REQUIRE(s.ok());
  for (CMat& w : s.comm_covariances) w *= 1.01;
  s.sensing_covariance *= 1.01;
  s.transmit_covariance *= 1.01;
  s.recovered = false;
  const VerificationReport rep = verify_solution(sc.problem, s);
  CHECK_FALSE(check_passed(rep, "power"));
  CHECK_FALSE(rep.passed());
}

TEST_CASE("verification recomputes the CRB of a hand-built covariance") {
  config::Scenario sc = test::small_scenario(8);
  sc.problem.sinr_targets = {0.5, 0.5};
  const CVec& h1 = sc.channels[0];
  const CVec& h2 = sc.channels[1];
  DesignSolution s;
  s.comm_covariances = {0.2 * h1 * h1.adjoint() / h1.squaredNorm(), 0.2 * h2 * h2.adjoint() / h2.squaredNorm()};
  s.sensing_covariance = 0.6 / 8 * CMat::Identity(8, 8);
  s.status = SolveStatus::Optimal;
  finalize_solution(sc.problem, s);
  const VerificationReport rep = verify_solution(sc.problem, s);
  CHECK_MESSAGE(rep.passed(), rep.summary());
  const double direct =
      fisher::crb(fisher::fim(*sc.problem.operators, s.transmit_covariance, sc.problem.sensing)).value;
  CHECK(test::rel(rep.crb, direct) <= 1e-10);
}

TEST_CASE("unreachable SINR targets are infeasible") {
  config::ScenarioConfig cfg;
  cfg.num_elements = 8;
  for (auto& u : cfg.users) u.sinr_target = 1e6;
  const config::Scenario sc = config::build_scenario(cfg);
  const DesignSolution s = solve_reduced_sdr(sc.problem);
  CHECK(s.status == SolveStatus::Infeasible);
  CHECK(s.diagnostics.min_sinr_power > 1.0);
  CHECK(min_power_for_sinr(sc.channels, sc.problem.sinr_targets, sc.problem.comm_noise) > 1.0);
}

TEST_CASE("without users the whole budget goes to sensing") {
  for (int n : {4, 8}) {
    config::Scenario sc = test::small_scenario(n);
    sc.problem.channels.clear();
    sc.problem.sinr_targets.clear();
    const DesignSolution s = solve_full_sdr(sc.problem);
    REQUIRE_MESSAGE(s.ok(), s.diagnostics.message);
    CHECK(s.transmit_covariance.trace().real() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.comm_covariances.empty());
  }
}

TEST_CASE("CRB is non-increasing in the power budget") {
  const config::Scenario sc = test::small_scenario(12);
  double prev = std::numeric_limits<double>::infinity();
  for (double p : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    DesignProblem pb = sc.problem;
    pb.power_budget = p;
    const DesignSolution s = solve_reduced_sdr(pb);
    REQUIRE(s.ok());
    const double crb = verify_solution(pb, s).crb;
    CHECK(crb <= prev * (1.0 + 1e-6));
    prev = crb;
  }
}

TEST_CASE("doubling snapshots halves the CRB of a fixed design") {
  const config::Scenario sc = test::small_scenario(12);
  const DesignSolution s = solve_reduced_sdr(sc.problem);
  REQUIRE(s.ok());
  DesignProblem pb = sc.problem;
  pb.sensing.snapshots *= 2;
  CHECK(test::rel(evaluate_crb(pb, s.transmit_covariance), 0.5 * evaluate_crb(sc.problem, s.transmit_covariance)) <=
        1e-10);
}

TEST_CASE("a single scatterer makes the proposed design the point-target design") {
  const config::Scenario sc = test::small_scenario(12);
  DesignProblem pb = sc.problem;
  const geometry::EtPointCloud pc = geometry::point_cloud(sc.config.target.x_c, sc.config.target.y_c);
  pb.operators = std::make_shared<fisher::FisherOperators>(fisher::build_operators(pc, sc.array));
  pb.basis.reset();
  const DesignSolution proposed = solve_full_sdr(pb);
  const DesignSolution point = baselines::point_target_design(pb, sc.array, sc.config.target);
  REQUIRE(proposed.ok());
  REQUIRE(point.ok());
  CHECK(test::rel(point.crb, proposed.crb) <= 1e-6);
}

TEST_CASE("problem validation") {
  config::Scenario sc = test::small_scenario(8);
  DesignProblem pb = sc.problem;
  pb.sinr_targets.pop_back();
  CHECK_THROWS_AS(pb.validate(), DimensionError);
  pb = sc.problem;
  pb.power_budget = 0.0;
  CHECK_THROWS_AS(pb.validate(), DomainError);
  pb = sc.problem;
  pb.operators.reset();
  CHECK_THROWS_AS(pb.validate(), DimensionError);
}

}  // TEST_SUITE
