#include "nfet/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define NFET_HAVE_AVX2_PATH 1
#include <immintrin.h>
#else
#define NFET_HAVE_AVX2_PATH 0
#endif

#include <cmath>

namespace nfet::simd {

#if NFET_HAVE_AVX2_PATH
namespace {

__attribute__((target("avx2,fma"))) double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc0);
  const __m128d hi = _mm256_extractf128_pd(acc0, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  double total = _mm_cvtsd_f64(s);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

__attribute__((target("avx2,fma"))) void path_difference_avx2(const double* qx, const double* qy,
                                                               std::size_t n, double px, double py,
                                                               double ref, double* out) {
  const __m256d vpx = _mm256_set1_pd(px);
  const __m256d vpy = _mm256_set1_pd(py);
  const __m256d vref = _mm256_set1_pd(ref);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(vpx, _mm256_loadu_pd(qx + i));
    const __m256d dy = _mm256_sub_pd(vpy, _mm256_loadu_pd(qy + i));
    // dx*dx + dy*dy without fusing, so the result matches the scalar path bit for bit
    const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_sqrt_pd(r2), vref));
  }
  for (; i < n; ++i) {
    const double dx = px - qx[i];
    const double dy = py - qy[i];
    out[i] = std::sqrt(dx * dx + dy * dy) - ref;
  }
}

__attribute__((target("avx2,fma"))) void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kAvx2{Isa::Avx2, &dot_avx2, &path_difference_avx2, &axpy_avx2};

}  // namespace

const KernelTable* avx2_kernels() { return &kAvx2; }

#else

const KernelTable* avx2_kernels() { return nullptr; }

#endif

}  // namespace nfet::simd
