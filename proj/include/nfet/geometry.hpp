#pragma once

#include <optional>
#include <vector>

#include "nfet/types.hpp"

namespace nfet::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  double norm() const;
};

/// Uniform linear array on the x-axis, centred at the origin.
///
/// Element n sits at ((n - (N-1)/2) d, 0). The reference point for steering
/// phases is the origin, so the phase of a far point is measured relative to
/// the array centre.
struct ArrayGeometry {
  int num_elements = 0;
  double carrier_freq = 0.0;  // Hz
  double wavelength = 0.0;    // m
  double spacing = 0.0;       // m
  double aperture = 0.0;      // (N-1) d, m
  double fresnel_distance = 0.0;  // 2 D^2 / lambda, m
  std::vector<double> element_x;  // m
  std::vector<double> element_y;  // m (all zero for the ULA)

  /// Half-wavelength ULA unless `spacing` is given.
  static ArrayGeometry ula(int num_elements, double carrier_freq, std::optional<double> spacing = {});

  Point2 element(int n) const { return {element_x[n], element_y[n]}; }
  double wavenumber() const { return 2.0 * kPi / wavelength; }
};

/// Geometric state of the elliptical extended target: centre, orientation,
/// semi-major and semi-minor axes.
struct EtParams {
  static constexpr int kDim = 5;
  enum Index { kXc = 0, kYc = 1, kPhi = 2, kLength = 3, kWidth = 4 };

  double x_c = 0.0;     // m
  double y_c = 0.0;     // m
  double phi = 0.0;     // rad, stored in (-pi, pi]
  double length = 0.0;  // m
  double width = 0.0;   // m

  // Validates and wraps phi.
  static EtParams make(double x_c, double y_c, double phi, double length, double width);
  Eigen::Matrix<double, kDim, 1> as_vector() const;
  static EtParams from_vector(const Eigen::Matrix<double, kDim, 1>& v);
};

struct EllipseLayout {
  int outer = 50;
  int inner = 25;
  int center = 1;  // 0 or 1
  double inner_scale = 0.5;

  int count() const { return outer + inner + center; }
};

/// Representative scattering points with their geometry Jacobians dp_m/deta.
struct EtPointCloud {
  int num_params = 0;
  std::vector<Point2> positions;
  std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> jacobians;
  CVec profile;  // beta_m

  int size() const { return static_cast<int>(positions.size()); }
};

struct UserSpec {
  double range = 0.0;  // m
  double angle = 0.0;  // rad from broadside
  cplx gain{1.0, 0.0};
  double sinr_target = 1.0;  // linear
};

double wrap_angle(double phi);

/// Broadside (+y) is theta = 0; positive angles towards +x.
Point2 polar_to_cart(double range, double angle);

/// Phase-exact spherical-wave steering vector, unit norm.
CVec steering(const ArrayGeometry& array, const Point2& p);

/// N x 2 matrix [da/dp_x, da/dp_y].
CMat steering_jacobian(const ArrayGeometry& array, const Point2& p);

EtPointCloud ellipse_cloud(const EtParams& eta, const EllipseLayout& layout = {});

/// Same point map as ellipse_cloud, positions only (used by finite-difference checks).
std::vector<Point2> ellipse_points(const EtParams& eta, const EllipseLayout& layout = {});

/// Single scatterer at (x, y) with parameter vector (x, y) and unit coefficient.
EtPointCloud point_cloud(double x, double y);

CVec user_channel(const ArrayGeometry& array, const UserSpec& user);

/// G = sum_m beta_m a_m a_m^H.
CMat response_matrix(const EtPointCloud& cloud, const ArrayGeometry& array);

}  // namespace nfet::geometry
