// AVX2 + FMA variants (4 doubles per lane). Main loops process full vectors,
// stragglers go through a scalar tail. gemm_nt uses a 4x2 register tile so
// each B row is loaded once per four A rows.

#include "modgrok/kernels.hpp"

#if defined(MODGROK_BUILD_AVX2)

#include <immintrin.h>

#include <cmath>

namespace mg::kern {
namespace {

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void square_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(v, v));
    }
    for (; i < n; ++i) out[i] = x[i] * x[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
        s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), s2);
        s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), s3);
    }
    for (; i + 4 <= n; i += 4)
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    double s = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_avx2(const double* x, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d v0 = _mm256_loadu_pd(x + i);
        __m256d v1 = _mm256_loadu_pd(x + i + 4);
        s0 = _mm256_fmadd_pd(v0, v0, s0);
        s1 = _mm256_fmadd_pd(v1, v1, s1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        s0 = _mm256_fmadd_pd(v, v, s0);
    }
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double max_abs_avx2(const double* x, std::size_t n) {
    const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        m = _mm256_max_pd(m, _mm256_and_pd(absmask, _mm256_loadu_pd(x + i)));
    __m128d lo = _mm_max_pd(_mm256_castpd256_pd128(m), _mm256_extractf128_pd(m, 1));
    double r = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
    for (; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > r) r = v;
    }
    return r;
}

// 4x2 tile: C[i..i+3, j..j+1] accumulated in 8 vector registers, k swept once.
void gemm_tile_4x2(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                   double* C, std::size_t ldc, std::size_t k, bool accumulate) {
    const double* a0 = A;
    const double* a1 = A + lda;
    const double* a2 = A + 2 * lda;
    const double* a3 = A + 3 * lda;
    const double* b0 = B;
    const double* b1 = B + ldb;
    __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
    __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
    __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
    __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
    std::size_t t = 0;
    for (; t + 4 <= k; t += 4) {
        __m256d vb0 = _mm256_loadu_pd(b0 + t);
        __m256d vb1 = _mm256_loadu_pd(b1 + t);
        __m256d va;
        va = _mm256_loadu_pd(a0 + t);
        c00 = _mm256_fmadd_pd(va, vb0, c00);
        c01 = _mm256_fmadd_pd(va, vb1, c01);
        va = _mm256_loadu_pd(a1 + t);
        c10 = _mm256_fmadd_pd(va, vb0, c10);
        c11 = _mm256_fmadd_pd(va, vb1, c11);
        va = _mm256_loadu_pd(a2 + t);
        c20 = _mm256_fmadd_pd(va, vb0, c20);
        c21 = _mm256_fmadd_pd(va, vb1, c21);
        va = _mm256_loadu_pd(a3 + t);
        c30 = _mm256_fmadd_pd(va, vb0, c30);
        c31 = _mm256_fmadd_pd(va, vb1, c31);
    }
    double s[4][2] = {{hsum(c00), hsum(c01)},
                      {hsum(c10), hsum(c11)},
                      {hsum(c20), hsum(c21)},
                      {hsum(c30), hsum(c31)}};
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

void gemm_nt_avx2(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                  double* C, std::size_t ldc, std::size_t m, std::size_t n, std::size_t k,
                  bool accumulate) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        std::size_t j = 0;
        for (; j + 2 <= n; j += 2)
            gemm_tile_4x2(A + i * lda, lda, B + j * ldb, ldb, C + i * ldc + j, ldc, k, accumulate);
        for (; j < n; ++j)
            for (std::size_t r = 0; r < 4; ++r) {
                double s = dot_avx2(A + (i + r) * lda, B + j * ldb, k);
                double* c = C + (i + r) * ldc + j;
                *c = accumulate ? *c + s : s;
            }
    }
    for (; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = dot_avx2(A + i * lda, B + j * ldb, k);
            double* c = C + i * ldc + j;
            *c = accumulate ? *c + s : s;
        }
}

}  // namespace

const Backend avx2_backend = {
    "avx2",    add_avx2, square_avx2, mul_avx2,     axpy_avx2,
    dot_avx2,  sum_sq_avx2, max_abs_avx2, gemm_nt_avx2,
};

}  // namespace mg::kern

#endif  // MODGROK_BUILD_AVX2
