#pragma once
// Vector kernels for the hot loops: batched forward/backward passes and
// tangent-kernel Gram assembly all reduce to a handful of contiguous
// double-precision primitives. Every primitive has a scalar reference
// implementation plus SIMD variants; the dispatcher picks the widest variant
// the CPU supports at process start. Tests assert scalar/SIMD equivalence.

#include <cstddef>

namespace mg::kern {

struct Backend {
    const char* name;
    // out = a + b
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    // out = x * x (elementwise)
    void (*square)(const double* x, double* out, std::size_t n);
    // out = a * b (elementwise)
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i x[i]^2
    double (*sum_sq)(const double* x, std::size_t n);
    // max_i |x[i]|
    double (*max_abs)(const double* x, std::size_t n);
    // C[i,j] (+)= sum_k A[i*lda+k] * B[j*ldb+k]; A is m x k, B is n x k, both
    // row-major, i.e. C = A * B^T. The workhorse behind batched logits.
    void (*gemm_nt)(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                    double* C, std::size_t ldc, std::size_t m, std::size_t n, std::size_t k,
                    bool accumulate);
};

extern const Backend scalar_backend;
#if defined(MODGROK_BUILD_AVX2)
extern const Backend avx2_backend;
#endif
#if defined(MODGROK_BUILD_AVX512)
extern const Backend avx512_backend;
#endif
#if defined(__ARM_NEON)
extern const Backend neon_backend;
#endif

// Active backend (runtime CPU detection, overridable for tests/benchmarks).
const Backend& active();
void force(const Backend& b);
void reset();  // back to auto-detected

// Convenience forwarders through the active backend.
inline void add(const double* a, const double* b, double* out, std::size_t n) { active().add(a, b, out, n); }
inline void square(const double* x, double* out, std::size_t n) { active().square(x, out, n); }
inline void mul(const double* a, const double* b, double* out, std::size_t n) { active().mul(a, b, out, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double sum_sq(const double* x, std::size_t n) { return active().sum_sq(x, n); }
inline double max_abs(const double* x, std::size_t n) { return active().max_abs(x, n); }
inline void gemm_nt(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                    double* C, std::size_t ldc, std::size_t m, std::size_t n, std::size_t k,
                    bool accumulate = false) {
    active().gemm_nt(A, lda, B, ldb, C, ldc, m, n, k, accumulate);
}

}  // namespace mg::kern
