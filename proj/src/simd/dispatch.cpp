#include <cstdlib>
#include <string_view>

#include "dephase/simd/kernels.hpp"

namespace dephase::simd {

#if defined(DEPHASE_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

const KernelTable* avx2_kernels() {
#if defined(DEPHASE_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable* table = [] {
    const char* forced = std::getenv("DEPHASE_SIMD");
    if (forced != nullptr && std::string_view(forced) == "scalar") {
      return &scalar_kernels();
    }
    const KernelTable* avx2 = avx2_kernels();
    return avx2 != nullptr ? avx2 : &scalar_kernels();
  }();
  return *table;
}

}  // namespace dephase::simd
