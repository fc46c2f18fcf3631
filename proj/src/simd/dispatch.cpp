#include <cstdlib>
#include <string_view>

#include "ficbo/simd/kernels.hpp"

namespace ficbo::simd {

#if defined(FICBO_HAVE_AVX2)
const Kernels& avx2_table();
#endif

const Kernels* avx2_kernels() {
#if defined(FICBO_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active() {
  static const Kernels& chosen = []() -> const Kernels& {
    const char* env = std::getenv("FICBO_SIMD");
    const std::string_view want = env != nullptr ? std::string_view(env) : std::string_view();
    if (want == "scalar") return scalar_kernels();
    if (const Kernels* k = avx2_kernels()) return *k;
    return scalar_kernels();
  }();
  return chosen;
}

}  // namespace ficbo::simd
