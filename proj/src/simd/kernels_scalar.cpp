#include "nfet/simd/kernels.hpp"

#include <cmath>

namespace nfet::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  // Four partial sums keep the error growth comparable to the vector path.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void path_difference_scalar(const double* qx, const double* qy, std::size_t n, double px, double py,
                            double ref, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = px - qx[i];
    const double dy = py - qy[i];
    out[i] = std::sqrt(dx * dx + dy * dy) - ref;
  }
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kScalar{Isa::Scalar, &dot_scalar, &path_difference_scalar, &axpy_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace nfet::simd
