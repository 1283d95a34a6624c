#include "lsgnn/kernels.hpp"

#include "kernel_loops.hpp"

namespace lsgnn::kernels {
namespace {

void axpy_scalar(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void axpby_scalar(std::size_t n, double a, const double* x, double b, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scale_scalar(std::size_t n, double a, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * y[i];
}

struct ScalarAxpy {
    void operator()(std::size_t n, double a, const double* x, double* y) const {
        axpy_scalar(n, a, x, y);
    }
};

void spmm_scalar(std::size_t rows, const std::int64_t* offsets, const std::int32_t* indices,
                 const double* values, const double* x, std::size_t cols, double* out) {
    loops::spmm(ScalarAxpy{}, rows, offsets, indices, values, x, cols, out);
}

void gemm_scalar(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                 double* out) {
    loops::gemm(ScalarAxpy{}, m, k, n, a, b, out);
}

void gemm_at_b_scalar(std::size_t m, std::size_t k, std::size_t n, const double* a,
                      const double* b, double* out) {
    loops::gemm_at_b(ScalarAxpy{}, m, k, n, a, b, out);
}

constexpr Table kScalar{Level::scalar, axpy_scalar,  axpby_scalar,    scale_scalar,
                        spmm_scalar,   gemm_scalar, gemm_at_b_scalar};

} // namespace

const Table& scalar_table() noexcept { return kScalar; }

} // namespace lsgnn::kernels
