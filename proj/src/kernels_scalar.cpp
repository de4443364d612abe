// Reference implementations. Deliberately plain loops: these define the
// semantics the SIMD variants are tested against.

#include "modgrok/kernels.hpp"

#include <cmath>

namespace mg::kern {
namespace {

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void square_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * x[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double max_abs_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > m) m = v;
    }
    return m;
}

void gemm_nt_scalar(const double* A, std::size_t lda, const double* B, std::size_t ldb,
                    double* C, std::size_t ldc, std::size_t m, std::size_t n, std::size_t k,
                    bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            const double* arow = A + i * lda;
            const double* brow = B + j * ldb;
            for (std::size_t t = 0; t < k; ++t) s += arow[t] * brow[t];
            double* c = C + i * ldc + j;
            *c = accumulate ? *c + s : s;
        }
    }
}

}  // namespace

const Backend scalar_backend = {
    "scalar",   add_scalar, square_scalar, mul_scalar,     axpy_scalar,
    dot_scalar, sum_sq_scalar, max_abs_scalar, gemm_nt_scalar,
};

}  // namespace mg::kern
