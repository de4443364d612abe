// NEON variants (2 doubles per lane, aarch64). Compiled only where NEON is a
// baseline feature, so no runtime probing is needed beyond the include guard.

#include "modgrok/kernels.hpp"

#if defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>

namespace mg::kern {
namespace {

void add_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void square_neon(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        vst1q_f64(out + i, vmulq_f64(v, v));
    }
    for (; i < n; ++i) out[i] = x[i] * x[i];
}

void mul_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t s0 = vdupq_n_f64(0.0), s1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 = vfmaq_f64(s0, vld1q_f64(a + i), vld1q_f64(b + i));
        s1 = vfmaq_f64(s1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) s0 = vfmaq_f64(s0, vld1q_f64(a + i), vld1q_f64(b + i));
    double s = vaddvq_f64(vaddq_f64(s0, s1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_neon(const double* x, std::size_t n) {
    float64x2_t s0 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        s0 = vfmaq_f64(s0, v, v);
    }
    double s = vaddvq_f64(s0);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double max_abs_neon(const double* x, std::size_t n) {
    float64x2_t m = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(x + i)));
    double r = vmaxvq_f64(m);
    for (; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > r) r = v;
    }
    return r;
}

void gemm_nt_neon(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                  double* C, std::size_t ldc, std::size_t m, std::size_t n, std::size_t k,
                  bool accumulate) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = dot_neon(A + i * lda, B + j * ldb, k);
            double* c = C + i * ldc + j;
            *c = accumulate ? *c + s : s;
        }
}

}  // namespace

const Backend neon_backend = {
    "neon",    add_neon, square_neon, mul_neon,     axpy_neon,
    dot_neon,  sum_sq_neon, max_abs_neon, gemm_nt_neon,
};

}  // namespace mg::kern

#endif  // __ARM_NEON
