#include "modgrok/kernels.hpp"

namespace mg::kern {
namespace {

const Backend* detect() {
#if defined(__ARM_NEON)
    return &neon_backend;
#else
#if defined(MODGROK_BUILD_AVX512) && defined(__GNUC__)
    if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("fma"))
        return &avx512_backend;
#endif
#if defined(MODGROK_BUILD_AVX2) && defined(__GNUC__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return &avx2_backend;
#endif
    return &scalar_backend;
#endif
}

const Backend* g_active = nullptr;

}  // namespace

const Backend& active() {
    if (!g_active) g_active = detect();
    return *g_active;
}

void force(const Backend& b) { g_active = &b; }

void reset() { g_active = detect(); }

}  // namespace mg::kern
