#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "nfet/error.hpp"
#include "nfet/geometry.hpp"

using namespace nfet;
using namespace nfet::geometry;

TEST_SUITE("geometry") {

TEST_CASE("ULA is centred with half-wavelength spacing") {
  const ArrayGeometry arr = ArrayGeometry::ula(64, 4.9e9);
  const double lambda = kSpeedOfLight / 4.9e9;
  CHECK(arr.wavelength == doctest::Approx(lambda).epsilon(1e-15));
  CHECK(arr.spacing == doctest::Approx(lambda / 2).epsilon(1e-15));
  CHECK(arr.element_x.front() == doctest::Approx(-arr.element_x.back()).epsilon(1e-15));
  CHECK(arr.aperture == doctest::Approx(63 * lambda / 2).epsilon(1e-14));
  CHECK(arr.fresnel_distance == doctest::Approx(2 * arr.aperture * arr.aperture / lambda).epsilon(1e-14));
}

TEST_CASE("steering matches independently computed values") {
  // numpy oracle: exp(-j 2 pi / lambda (|p - q_n| - |p|)) / sqrt(N), N = 8, fc = 4.9 GHz.
  const ArrayGeometry arr = ArrayGeometry::ula(8, 4.9e9);
  struct Golden {
    int n;
    double re, im;
  };
  auto check = [](const CVec& a, std::initializer_list<Golden> g) {
    for (const auto& e : g) {
      CHECK(a[e.n].real() == doctest::Approx(e.re).epsilon(1e-12));
      CHECK(a[e.n].imag() == doctest::Approx(e.im).epsilon(1e-12));
    }
  };
  check(steering(arr, {3.0, 10.0}), {{0, -0.3526989896632133, 0.024564663452784366},
                                     {3, 0.31798300780969385, -0.15455357240872866},
                                     {7, -0.35335007090313714, 0.011988635983626594}});
  check(user_channel(arr, {15.0, -25.0 * kPi / 180.0}), {{0, -0.034518704920316445, -0.35186426219584177},
                                                         {3, 0.27861171349591507, 0.2176591672842431},
                                                         {7, -0.011778933883477123, 0.3533571234835498}});
  check(user_channel(arr, {18.0, 35.0 * kPi / 180.0}), {{0, 0.35318770961853624, -0.016076124359201808},
                                                        {3, 0.21937899943878178, -0.2772595437586215},
                                                        {7, 0.3535529389186608, 0.0005651389012299802}});
}

TEST_CASE("steering is unit norm with entries of magnitude 1/sqrt(N)") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-30, 30), uy(5, 40);
  const ArrayGeometry arr = ArrayGeometry::ula(64, 4.9e9);
  for (int i = 0; i < 100; ++i) {
    const CVec a = steering(arr, {ux(rng), uy(rng)});
    CHECK(std::abs(a.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(std::abs(a[5]) - 0.125) <= 1e-14);
  }
}

TEST_CASE("steering Jacobian matches central differences over 100 points") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ux(-30, 30), uy(5, 40);
  const ArrayGeometry arr = ArrayGeometry::ula(64, 4.9e9);
  const double h = 1e-4;
  for (int i = 0; i < 100; ++i) {
    const Point2 p{ux(rng), uy(rng)};
    const CMat g = steering_jacobian(arr, p);
    CMat fd(64, 2);
    fd.col(0) = (steering(arr, {p.x + h, p.y}) - steering(arr, {p.x - h, p.y})) / (2 * h);
    fd.col(1) = (steering(arr, {p.x, p.y + h}) - steering(arr, {p.x, p.y - h})) / (2 * h);
    CHECK((g - fd).norm() / g.norm() <= 1e-6);
  }
}

TEST_CASE("common phase leaves pairwise inner-product magnitudes unchanged") {
  const ArrayGeometry arr = ArrayGeometry::ula(16, 4.9e9);
  const std::vector<Point2> pts{{0, 10}, {3, 12}, {-4, 20}, {8, 25}};
  const cplx ph = std::polar(1.0, 0.7);
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = 0; j < pts.size(); ++j) {
      const CVec ai = steering(arr, pts[i]), aj = steering(arr, pts[j]);
      CHECK(std::abs(std::abs((ph * ai).dot(ph * aj)) - std::abs(ai.dot(aj))) <= 1e-14);
    }
  }
}

TEST_CASE("steering rejects the array reference and element positions") {
  const ArrayGeometry arr = ArrayGeometry::ula(8, 4.9e9);
  CHECK_THROWS_AS(steering(arr, {0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(steering_jacobian(arr, arr.element(2)), DomainError);
}

TEST_CASE("polar convention measures angles from broadside") {
  const Point2 p = polar_to_cart(10.0, kPi / 6);
  CHECK(p.x == doctest::Approx(5.0));
  CHECK(p.y == doctest::Approx(10.0 * std::sqrt(3.0) / 2));
}

TEST_CASE("ellipse cloud layout and placement") {
  const EtParams eta = EtParams::make(0.0, 20.0, 30.0 * kPi / 180.0, 3.0, 0.8);
  const EtPointCloud cloud = ellipse_cloud(eta);
  CHECK(cloud.size() == 76);
  CHECK(cloud.num_params == 5);
  // Point 0 sits at the end of the major axis.
  CHECK(cloud.positions[0].x == doctest::Approx(3.0 * std::cos(kPi / 6)).epsilon(1e-14));
  CHECK(cloud.positions[0].y == doctest::Approx(20.0 + 3.0 * std::sin(kPi / 6)).epsilon(1e-14));
  // Inner ring at half scale, centre last.
  CHECK(cloud.positions[50].x == doctest::Approx(1.5 * std::cos(kPi / 6)).epsilon(1e-14));
  CHECK(cloud.positions[75].x == 0.0);
  CHECK(cloud.positions[75].y == 20.0);
  // Orientation and size columns vanish at the centre.
  CHECK(cloud.jacobians[75].rightCols(3).norm() == 0.0);

  for (const EllipseLayout layout : {EllipseLayout{7, 3, 0, 0.5}, EllipseLayout{1, 0, 1, 0.5}, EllipseLayout{0, 0, 1, 0.5}}) {
    CHECK(ellipse_cloud(eta, layout).size() == layout.outer + layout.inner + layout.center);
  }
  CHECK_THROWS_AS(EtParams::make(0, 20, 0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(EtParams::make(0, 20, 0, 1.0, -1.0), DomainError);
}

TEST_CASE("ellipse Jacobians match central differences over 100 draws") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  const double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const EtParams eta = EtParams::make(-10 + 20 * u(rng), 10 + 30 * u(rng), -kPi + 2 * kPi * u(rng), 0.5 + 5 * u(rng),
                                        0.2 + 2 * u(rng));
    const EtPointCloud cloud = ellipse_cloud(eta);
    for (int p = 0; p < 5; ++p) {
      auto v = eta.as_vector();
      v[p] += h;
      const auto plus = ellipse_points(EtParams::from_vector(v));
      v[p] -= 2 * h;
      const auto minus = ellipse_points(EtParams::from_vector(v));
      for (int m = 0; m < cloud.size(); ++m) {
        worst = std::max(worst, std::abs((plus[m].x - minus[m].x) / (2 * h) - cloud.jacobians[m](0, p)));
        worst = std::max(worst, std::abs((plus[m].y - minus[m].y) / (2 * h) - cloud.jacobians[m](1, p)));
      }
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("angles wrap into (-pi, pi]") {
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(0.25) == 0.25);
  CHECK(EtParams::make(0, 20, 2 * kPi + 0.5, 1, 1).phi == doctest::Approx(0.5));
}

TEST_CASE("response matrix") {
  const ArrayGeometry arr = ArrayGeometry::ula(16, 4.9e9);
  const EtPointCloud single = point_cloud(1.0, 12.0);
  const CVec a = steering(arr, {1.0, 12.0});
  const CMat g1 = response_matrix(single, arr);
  CHECK((g1 - a * a.adjoint()).norm() <= 1e-14);
  CHECK(g1.trace().real() == doctest::Approx(1.0));

  EtPointCloud cloud = ellipse_cloud(EtParams::make(0, 20, 0.5, 3, 0.8));
  CHECK(response_matrix(cloud, arr).trace().real() == doctest::Approx(76.0).epsilon(1e-12));
  cloud.profile.setZero();
  CHECK(response_matrix(cloud, arr).norm() == 0.0);
}

}  // TEST_SUITE
