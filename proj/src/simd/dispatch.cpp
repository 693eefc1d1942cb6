#include <cstdlib>
#include <string_view>

#include "lefgpd/simd/kernels.hpp"

namespace lefgpd::simd {

#if defined(LEFGPD_HAVE_AVX2)
const KernelTable* avx2_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(LEFGPD_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* forced = std::getenv("LEFGPD_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return *t;
    return scalar_kernels();
  }();
  return table;
}

}  // namespace lefgpd::simd
