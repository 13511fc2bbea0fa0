#include "nfet/geometry.hpp"

#include <cmath>
#include <string>

#include "nfet/error.hpp"
#include "nfet/simd/kernels.hpp"

namespace nfet::geometry {

double Point2::norm() const { return std::hypot(x, y); }

ArrayGeometry ArrayGeometry::ula(int num_elements, double carrier_freq, std::optional<double> spacing) {
  if (num_elements < 1) throw DomainError("array needs at least one element");
  if (!(carrier_freq > 0.0)) throw DomainError("carrier frequency must be positive");
  ArrayGeometry a;
  a.num_elements = num_elements;
  a.carrier_freq = carrier_freq;
  a.wavelength = kSpeedOfLight / carrier_freq;
  a.spacing = spacing.value_or(0.5 * a.wavelength);
  if (!(a.spacing > 0.0)) throw DomainError("element spacing must be positive");
  a.aperture = (num_elements - 1) * a.spacing;
  a.fresnel_distance = 2.0 * a.aperture * a.aperture / a.wavelength;
  a.element_x.resize(num_elements);
  a.element_y.assign(num_elements, 0.0);
  const double mid = 0.5 * (num_elements - 1);
  for (int n = 0; n < num_elements; ++n) a.element_x[n] = (n - mid) * a.spacing;
  return a;
}

double wrap_angle(double phi) {
  double w = std::remainder(phi, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

EtParams EtParams::make(double x_c, double y_c, double phi, double length, double width) {
  if (!(length > 0.0) || !(width > 0.0)) {
    throw DomainError("ellipse semi-axes must be positive (L=" + std::to_string(length) +
                      ", b=" + std::to_string(width) + ")");
  }
  if (!std::isfinite(x_c) || !std::isfinite(y_c) || !std::isfinite(phi)) {
    throw DomainError("target parameters must be finite");
  }
  return EtParams{x_c, y_c, wrap_angle(phi), length, width};
}

Eigen::Matrix<double, EtParams::kDim, 1> EtParams::as_vector() const {
  Eigen::Matrix<double, kDim, 1> v;
  v << x_c, y_c, phi, length, width;
  return v;
}

EtParams EtParams::from_vector(const Eigen::Matrix<double, kDim, 1>& v) {
  return make(v[0], v[1], v[2], v[3], v[4]);
}

Point2 polar_to_cart(double range, double angle) {
  if (!(range > 0.0)) throw DomainError("range must be positive");
  return {range * std::sin(angle), range * std::cos(angle)};
}

namespace {

void check_reference(const Point2& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DomainError("point has non-finite coordinates");
  if (p.norm() == 0.0) throw DomainError("steering point at the origin: reference distance is zero");
}

}  // namespace

CVec steering(const ArrayGeometry& array, const Point2& p) {
  check_reference(p);
  const int n = array.num_elements;
  std::vector<double> diff(n);
  simd::active().path_difference(array.element_x.data(), array.element_y.data(), n, p.x, p.y, p.norm(),
                                 diff.data());
  const double k = array.wavenumber();
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  CVec a(n);
  for (int i = 0; i < n; ++i) a[i] = std::polar(amp, -k * diff[i]);
  return a;
}

CMat steering_jacobian(const ArrayGeometry& array, const Point2& p) {
  const CVec a = steering(array, p);
  const int n = array.num_elements;
  const double dref = p.norm();
  const cplx factor(0.0, -array.wavenumber());
  CMat g(n, 2);
  for (int i = 0; i < n; ++i) {
    const double dx = p.x - array.element_x[i];
    const double dy = p.y - array.element_y[i];
    const double dn = std::hypot(dx, dy);
    if (dn <= 1e-12 * std::max(1.0, dref)) {
      throw DomainError("point coincides with array element " + std::to_string(i));
    }
    g(i, 0) = a[i] * factor * (dx / dn - p.x / dref);
    g(i, 1) = a[i] * factor * (dy / dn - p.y / dref);
  }
  return g;
}

namespace {

Eigen::Matrix2d rotation(double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::Matrix2d rotation_derivative(double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Eigen::Matrix2d r;
  r << -s, -c, c, -s;
  return r;
}

void check_layout(const EllipseLayout& layout) {
  if (layout.outer < 0 || layout.inner < 0 || (layout.center != 0 && layout.center != 1)) {
    throw DomainError("invalid ellipse layout counts");
  }
  if (layout.count() == 0) throw DomainError("ellipse layout has no points");
}

template <typename Visit>
void for_each_ellipse_point(const EtParams& eta, const EllipseLayout& layout, Visit&& visit) {
  check_layout(layout);
  const Eigen::Vector2d centre(eta.x_c, eta.y_c);
  const Eigen::Matrix2d rot = rotation(eta.phi);
  const Eigen::Matrix2d drot = rotation_derivative(eta.phi);
  auto ring = [&](int count, double scale) {
    for (int m = 0; m < count; ++m) {
      const double t = 2.0 * kPi * m / count;
      const Eigen::Vector2d local(scale * eta.length * std::cos(t), scale * eta.width * std::sin(t));
      const Eigen::Vector2d pos = centre + rot * local;
      Eigen::Matrix<double, 2, EtParams::kDim> jac;
      jac.col(EtParams::kXc) << 1.0, 0.0;
      jac.col(EtParams::kYc) << 0.0, 1.0;
      jac.col(EtParams::kPhi) = drot * local;
      jac.col(EtParams::kLength) = rot * Eigen::Vector2d(scale * std::cos(t), 0.0);
      jac.col(EtParams::kWidth) = rot * Eigen::Vector2d(0.0, scale * std::sin(t));
      visit(Point2{pos.x(), pos.y()}, jac);
    }
  };
  ring(layout.outer, 1.0);
  ring(layout.inner, layout.inner_scale);
  if (layout.center == 1) {
    Eigen::Matrix<double, 2, EtParams::kDim> jac = Eigen::Matrix<double, 2, EtParams::kDim>::Zero();
    jac(0, EtParams::kXc) = 1.0;
    jac(1, EtParams::kYc) = 1.0;
    visit(Point2{eta.x_c, eta.y_c}, jac);
  }
}

}  // namespace

EtPointCloud ellipse_cloud(const EtParams& eta, const EllipseLayout& layout) {
  if (!(eta.length > 0.0) || !(eta.width > 0.0)) throw DomainError("ellipse semi-axes must be positive");
  EtPointCloud cloud;
  cloud.num_params = EtParams::kDim;
  for_each_ellipse_point(eta, layout, [&](const Point2& p, const Eigen::Matrix<double, 2, EtParams::kDim>& j) {
    cloud.positions.push_back(p);
    cloud.jacobians.emplace_back(j);
  });
  cloud.profile = CVec::Ones(cloud.size());
  return cloud;
}

std::vector<Point2> ellipse_points(const EtParams& eta, const EllipseLayout& layout) {
  std::vector<Point2> pts;
  for_each_ellipse_point(eta, layout, [&](const Point2& p, const auto&) { pts.push_back(p); });
  return pts;
}

EtPointCloud point_cloud(double x, double y) {
  EtPointCloud cloud;
  cloud.num_params = 2;
  cloud.positions.push_back({x, y});
  cloud.jacobians.emplace_back(Eigen::Matrix2d::Identity());
  cloud.profile = CVec::Ones(1);
  return cloud;
}

CVec user_channel(const ArrayGeometry& array, const UserSpec& user) {
  return user.gain * steering(array, polar_to_cart(user.range, user.angle));
}

CMat response_matrix(const EtPointCloud& cloud, const ArrayGeometry& array) {
  const int n = array.num_elements;
  CMat g = CMat::Zero(n, n);
  for (int m = 0; m < cloud.size(); ++m) {
    if (cloud.profile[m] == cplx(0.0)) continue;
    const CVec a = steering(array, cloud.positions[m]);
    g.noalias() += cloud.profile[m] * (a * a.adjoint());
  }
  return g;
}

}  // namespace nfet::geometry
