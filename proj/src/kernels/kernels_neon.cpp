// AArch64 only; NEON is part of the base ISA there, so no runtime check.
#include "lsgnn/kernels.hpp"

#include <arm_neon.h>

#include "kernel_loops.hpp"

namespace lsgnn::kernels {
namespace {

void axpy_neon(std::size_t n, double a, const double* x, double* y) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        // vmulq + vaddq rather than vfmaq: keeps the scalar rounding sequence.
        float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void axpby_neon(std::size_t n, double a, const double* x, double b, double* y) {
    const float64x2_t va = vdupq_n_f64(a);
    const float64x2_t vb = vdupq_n_f64(b);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t ax = vmulq_f64(va, vld1q_f64(x + i));
        float64x2_t by = vmulq_f64(vb, vld1q_f64(y + i));
        vst1q_f64(y + i, vaddq_f64(ax, by));
    }
    for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scale_neon(std::size_t n, double a, double* y) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(y + i)));
    for (; i < n; ++i) y[i] = a * y[i];
}

struct NeonAxpy {
    void operator()(std::size_t n, double a, const double* x, double* y) const {
        axpy_neon(n, a, x, y);
    }
};

void spmm_neon(std::size_t rows, const std::int64_t* offsets, const std::int32_t* indices,
               const double* values, const double* x, std::size_t cols, double* out) {
    loops::spmm(NeonAxpy{}, rows, offsets, indices, values, x, cols, out);
}

void gemm_neon(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
               double* out) {
    loops::gemm(NeonAxpy{}, m, k, n, a, b, out);
}

void gemm_at_b_neon(std::size_t m, std::size_t k, std::size_t n, const double* a,
                    const double* b, double* out) {
    loops::gemm_at_b(NeonAxpy{}, m, k, n, a, b, out);
}

constexpr Table kNeon{Level::neon, axpy_neon, axpby_neon,    scale_neon,
                      spmm_neon,   gemm_neon, gemm_at_b_neon};

} // namespace

const Table* neon_table() noexcept { return &kNeon; }

} // namespace lsgnn::kernels
