#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "modgrok/kernels.hpp"

using namespace mg;

namespace {

std::vector<const kern::Backend*> available_backends() {
    std::vector<const kern::Backend*> v{&kern::scalar_backend};
#if defined(MODGROK_BUILD_AVX2)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        v.push_back(&kern::avx2_backend);
#endif
#if defined(MODGROK_BUILD_AVX512)
    if (__builtin_cpu_supports("avx512f")) v.push_back(&kern::avx512_backend);
#endif
#if defined(__ARM_NEON)
    v.push_back(&kern::neon_backend);
#endif
    return v;
}

std::vector<double> randvec(std::mt19937& g, std::size_t n) {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(g);
    return v;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

// SIMD variants must agree with the scalar reference on awkward lengths
// (tails shorter than one vector, exact multiples, large).
TEST_CASE("simd backends match scalar reference") {
    std::mt19937 g(42);
    auto backends = available_backends();
    REQUIRE(!backends.empty());
    for (std::size_t n : {std::size_t(1), std::size_t(3), std::size_t(7), std::size_t(8),
                          std::size_t(15), std::size_t(16), std::size_t(17), std::size_t(64),
                          std::size_t(1003)}) {
        auto a = randvec(g, n), b = randvec(g, n);
        for (const kern::Backend* bk : backends) {
            CAPTURE(bk->name);
            CAPTURE(n);
            std::vector<double> out1(n), out2(n);
            kern::scalar_backend.add(a.data(), b.data(), out1.data(), n);
            bk->add(a.data(), b.data(), out2.data(), n);
            CHECK(out1 == out2);

            kern::scalar_backend.square(a.data(), out1.data(), n);
            bk->square(a.data(), out2.data(), n);
            CHECK(out1 == out2);

            kern::scalar_backend.mul(a.data(), b.data(), out1.data(), n);
            bk->mul(a.data(), b.data(), out2.data(), n);
            CHECK(out1 == out2);

            std::vector<double> y1 = b, y2 = b;
            kern::scalar_backend.axpy(0.37, a.data(), y1.data(), n);
            bk->axpy(0.37, a.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));

            CHECK(bk->dot(a.data(), b.data(), n) ==
                  doctest::Approx(kern::scalar_backend.dot(a.data(), b.data(), n)).epsilon(1e-13));
            CHECK(bk->sum_sq(a.data(), n) ==
                  doctest::Approx(kern::scalar_backend.sum_sq(a.data(), n)).epsilon(1e-13));
            CHECK(bk->max_abs(a.data(), n) == kern::scalar_backend.max_abs(a.data(), n));
        }
    }
}

TEST_CASE("gemm_nt shapes, tails, accumulate flag") {
    std::mt19937 g(7);
    auto backends = available_backends();
    const std::vector<std::array<std::size_t, 3>> shapes = {
        {1, 1, 1}, {3, 5, 7}, {8, 8, 16}, {13, 9, 33}, {40, 25, 188}};
    for (auto [m, n, k] : shapes) {
        auto A = randvec(g, m * k), B = randvec(g, n * k);
        // reference: plain triple loop
        std::vector<double> ref(m * n, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0;
                for (std::size_t kk = 0; kk < k; ++kk) acc += A[i * k + kk] * B[j * k + kk];
                ref[i * n + j] = acc;
            }
        for (const kern::Backend* bk : backends) {
            CAPTURE(bk->name);
            std::vector<double> C(m * n, 99.0);
            bk->gemm_nt(A.data(), k, B.data(), k, C.data(), n, m, n, k, false);
            for (std::size_t i = 0; i < m * n; ++i)
                CHECK(C[i] == doctest::Approx(ref[i]).epsilon(1e-12));
            // accumulate=true adds on top
            bk->gemm_nt(A.data(), k, B.data(), k, C.data(), n, m, n, k, true);
            for (std::size_t i = 0; i < m * n; ++i)
                CHECK(C[i] == doctest::Approx(2 * ref[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("gemm_nt respects leading dimensions") {
    std::mt19937 g(11);
    std::size_t m = 4, n = 3, k = 5, lda = 9, ldb = 8, ldc = 6;
    auto A = randvec(g, m * lda), B = randvec(g, n * ldb);
    std::vector<double> C(m * ldc, -1.0), ref = C;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0;
            for (std::size_t kk = 0; kk < k; ++kk) acc += A[i * lda + kk] * B[j * ldb + kk];
            ref[i * ldc + j] = acc;
        }
    for (const kern::Backend* bk : available_backends()) {
        CAPTURE(bk->name);
        std::vector<double> out(m * ldc, -1.0);
        bk->gemm_nt(A.data(), lda, B.data(), ldb, out.data(), ldc, m, n, k, false);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j)
                CHECK(out[i * ldc + j] == doctest::Approx(ref[i * ldc + j]).epsilon(1e-12));
            // padding columns untouched
            for (std::size_t j = n; j < ldc; ++j) CHECK(out[i * ldc + j] == -1.0);
        }
    }
}

TEST_CASE("force() swaps the active backend") {
    const kern::Backend& before = kern::active();
    kern::force(kern::scalar_backend);
    CHECK(std::string(kern::active().name) == "scalar");
    kern::reset();
    CHECK(std::string(kern::active().name) == std::string(before.name));
}

TEST_SUITE_END();
