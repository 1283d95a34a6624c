// Compiled with -mavx2 (no -mfma). Only reached after a runtime CPU check.
#include "lsgnn/kernels.hpp"

#include <immintrin.h>

#include "kernel_loops.hpp"

namespace lsgnn::kernels {
namespace {

void axpy_avx2(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d y0 = _mm256_loadu_pd(y + i);
        __m256d y1 = _mm256_loadu_pd(y + i + 4);
        y0 = _mm256_add_pd(y0, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        y1 = _mm256_add_pd(y1, _mm256_mul_pd(va, _mm256_loadu_pd(x + i + 4)));
        _mm256_storeu_pd(y + i, y0);
        _mm256_storeu_pd(y + i + 4, y1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d y0 = _mm256_loadu_pd(y + i);
        y0 = _mm256_add_pd(y0, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, y0);
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void axpby_avx2(std::size_t n, double a, const double* x, double b, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        __m256d by = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(ax, by));
    }
    for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scale_avx2(std::size_t n, double a, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] = a * y[i];
}

struct Avx2Axpy {
    void operator()(std::size_t n, double a, const double* x, double* y) const {
        axpy_avx2(n, a, x, y);
    }
};

void spmm_avx2(std::size_t rows, const std::int64_t* offsets, const std::int32_t* indices,
               const double* values, const double* x, std::size_t cols, double* out) {
    loops::spmm(Avx2Axpy{}, rows, offsets, indices, values, x, cols, out);
}

void gemm_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
               double* out) {
    loops::gemm(Avx2Axpy{}, m, k, n, a, b, out);
}

void gemm_at_b_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a,
                    const double* b, double* out) {
    loops::gemm_at_b(Avx2Axpy{}, m, k, n, a, b, out);
}

constexpr Table kAvx2{Level::avx2, axpy_avx2, axpby_avx2,    scale_avx2,
                      spmm_avx2,   gemm_avx2, gemm_at_b_avx2};

} // namespace

const Table* avx2_table() noexcept { return &kAvx2; }

} // namespace lsgnn::kernels
