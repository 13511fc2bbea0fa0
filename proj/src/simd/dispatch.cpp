#include <cstdlib>
#include <string>

#include "nfet/simd/kernels.hpp"

namespace nfet::simd {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("NFET_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels(); t != nullptr && cpu_has_avx2()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace nfet::simd
