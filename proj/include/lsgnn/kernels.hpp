#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace lsgnn::kernels {

// Inner loops of propagation and of the dense model. Every SIMD variant
// vectorizes across the contiguous (column) axis only and uses separate
// multiply and add, so each output entry sees the same operation sequence
// as the scalar reference and results agree bit for bit.

enum class Level { scalar, avx2, neon };

struct Table {
    Level level;
    // y[0..n) += a * x[0..n)
    void (*axpy)(std::size_t n, double a, const double* x, double* y);
    // y[0..n) = a * x[0..n) + b * y[0..n)
    void (*axpby)(std::size_t n, double a, const double* x, double b, double* y);
    // y[0..n) *= a
    void (*scale)(std::size_t n, double a, double* y);
    // CSR (rows x ?) times dense (? x cols), row-major, output rows x cols (overwritten).
    void (*spmm)(std::size_t rows, const std::int64_t* offsets, const std::int32_t* indices,
                 const double* values, const double* x, std::size_t cols, double* out);
    // Dense out(m x n) = a(m x k) * b(k x n), all row-major; out overwritten.
    void (*gemm)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                 double* out);
    // Dense out(k x n) = a(m x k)^T * b(m x n); out overwritten.
    void (*gemm_at_b)(std::size_t m, std::size_t k, std::size_t n, const double* a,
                      const double* b, double* out);
};

const Table& scalar_table() noexcept;
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
const Table* avx2_table() noexcept;   // nullptr when not compiled in
#endif
#if defined(__aarch64__)
const Table* neon_table() noexcept;
#endif

// Best table supported by the running CPU, unless overridden by the
// LSGNN_SIMD environment variable (scalar | avx2 | neon | auto) or force().
const Table& active() noexcept;
void force(Level level);              // throws InputError if unsupported on this CPU
bool supported(Level level) noexcept;
std::string_view name(Level level) noexcept;

} // namespace lsgnn::kernels
