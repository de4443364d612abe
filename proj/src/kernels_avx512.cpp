// AVX-512F variants (8 doubles per lane). Same structure as the AVX2 file;
// only dot/axpy/gemm matter for throughput, the rest reuse the simple pattern.

#include "modgrok/kernels.hpp"

#if defined(MODGROK_BUILD_AVX512)

#include <immintrin.h>

#include <cmath>

namespace mg::kern {
namespace {

void add_avx512(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(out + i, _mm512_add_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void square_avx512(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m512d v = _mm512_loadu_pd(x + i);
        _mm512_storeu_pd(out + i, _mm512_mul_pd(v, v));
    }
    for (; i < n; ++i) out[i] = x[i] * x[i];
}

void mul_avx512(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(out + i, _mm512_mul_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx512(double alpha, const double* x, double* y, std::size_t n) {
    const __m512d va = _mm512_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_fmadd_pd(va, _mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot_avx512(const double* a, const double* b, std::size_t n) {
    __m512d s0 = _mm512_setzero_pd(), s1 = _mm512_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        s0 = _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i), s0);
        s1 = _mm512_fmadd_pd(_mm512_loadu_pd(a + i + 8), _mm512_loadu_pd(b + i + 8), s1);
    }
    for (; i + 8 <= n; i += 8)
        s0 = _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i), s0);
    double s = _mm512_reduce_add_pd(_mm512_add_pd(s0, s1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_avx512(const double* x, std::size_t n) {
    __m512d s0 = _mm512_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m512d v = _mm512_loadu_pd(x + i);
        s0 = _mm512_fmadd_pd(v, v, s0);
    }
    double s = _mm512_reduce_add_pd(s0);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double max_abs_avx512(const double* x, std::size_t n) {
    __m512d m = _mm512_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        m = _mm512_max_pd(m, _mm512_abs_pd(_mm512_loadu_pd(x + i)));
    double r = _mm512_reduce_max_pd(m);
    for (; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > r) r = v;
    }
    return r;
}

void gemm_tile_4x2(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                   double* C, std::size_t ldc, std::size_t k, bool accumulate) {
    const double* a0 = A;
    const double* a1 = A + lda;
    const double* a2 = A + 2 * lda;
    const double* a3 = A + 3 * lda;
    const double* b0 = B;
    const double* b1 = B + ldb;
    __m512d c00 = _mm512_setzero_pd(), c01 = _mm512_setzero_pd();
    __m512d c10 = _mm512_setzero_pd(), c11 = _mm512_setzero_pd();
    __m512d c20 = _mm512_setzero_pd(), c21 = _mm512_setzero_pd();
    __m512d c30 = _mm512_setzero_pd(), c31 = _mm512_setzero_pd();
    std::size_t t = 0;
    for (; t + 8 <= k; t += 8) {
        __m512d vb0 = _mm512_loadu_pd(b0 + t);
        __m512d vb1 = _mm512_loadu_pd(b1 + t);
        __m512d va;
        va = _mm512_loadu_pd(a0 + t);
        c00 = _mm512_fmadd_pd(va, vb0, c00);
        c01 = _mm512_fmadd_pd(va, vb1, c01);
        va = _mm512_loadu_pd(a1 + t);
        c10 = _mm512_fmadd_pd(va, vb0, c10);
        c11 = _mm512_fmadd_pd(va, vb1, c11);
        va = _mm512_loadu_pd(a2 + t);
        c20 = _mm512_fmadd_pd(va, vb0, c20);
        c21 = _mm512_fmadd_pd(va, vb1, c21);
        va = _mm512_loadu_pd(a3 + t);
        c30 = _mm512_fmadd_pd(va, vb0, c30);
        c31 = _mm512_fmadd_pd(va, vb1, c31);
    }
    double s[4][2] = {
        {_mm512_reduce_add_pd(c00), _mm512_reduce_add_pd(c01)},
        {_mm512_reduce_add_pd(c10), _mm512_reduce_add_pd(c11)},
        {_mm512_reduce_add_pd(c20), _mm512_reduce_add_pd(c21)},
        {_mm512_reduce_add_pd(c30), _mm512_reduce_add_pd(c31)}};
    for (; t < k; ++t) {
        s[0][0] += a0[t] * b0[t]; s[0][1] += a0[t] * b1[t];
        s[1][0] += a1[t] * b0[t]; s[1][1] += a1[t] * b1[t];
        s[2][0] += a2[t] * b0[t]; s[2][1] += a2[t] * b1[t];
        s[3][0] += a3[t] * b0[t]; s[3][1] += a3[t] * b1[t];
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) {
            double* c = C + i * ldc + j;
            *c = accumulate ? *c + s[i][j] : s[i][j];
        }
}

void gemm_nt_avx512(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                    double* C, std::size_t ldc, std::size_t m, std::size_t n, std::size_t k,
                    bool accumulate) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        std::size_t j = 0;
        for (; j + 2 <= n; j += 2)
            gemm_tile_4x2(A + i * lda, lda, B + j * ldb, ldb, C + i * ldc + j, ldc, k, accumulate);
        for (; j < n; ++j)
            for (std::size_t r = 0; r < 4; ++r) {
                double s = dot_avx512(A + (i + r) * lda, B + j * ldb, k);
                double* c = C + (i + r) * ldc + j;
                *c = accumulate ? *c + s : s;
            }
    }
    for (; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = dot_avx512(A + i * lda, B + j * ldb, k);
            double* c = C + i * ldc + j;
            *c = accumulate ? *c + s : s;
        }
}

}  // namespace

const Backend avx512_backend = {
    "avx512",    add_avx512, square_avx512, mul_avx512,     axpy_avx512,
    dot_avx512,  sum_sq_avx512, max_abs_avx512, gemm_nt_avx512,
};

}  // namespace mg::kern

#endif  // MODGROK_BUILD_AVX512
