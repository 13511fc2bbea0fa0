#pragma once

// Data-parallel inner loops used by the geometry and solver code. Each kernel
// has a portable scalar reference and an AVX2/FMA variant; the active table is
// picked once at first use from CPUID and can be forced to the scalar path
// with NFET_SIMD=scalar.

#include <cstddef>
#include <string_view>

namespace nfet::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // out[i] = sqrt((px - qx[i])^2 + (py - qy[i])^2) - ref
  void (*path_difference)(const double* qx, const double* qy, std::size_t n, double px, double py,
                          double ref, double* out);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();

// Table selected for this process.
const KernelTable& active();

std::string_view isa_name(Isa isa);

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }

}  // namespace nfet::simd
