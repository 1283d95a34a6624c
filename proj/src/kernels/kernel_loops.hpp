#pragma once

// Loop skeletons shared by every kernel level. Each translation unit
// instantiates them with its own row primitive (declared in an anonymous
// namespace there), so the SIMD TUs never share instantiations with the
// scalar one.

#include <cstddef>
#include <cstdint>
#include <cstring>

namespace lsgnn::kernels::loops {

template <class Axpy>
inline void spmm(Axpy axpy, std::size_t rows, const std::int64_t* offsets,
                 const std::int32_t* indices, const double* values, const double* x,
                 std::size_t cols, double* out) {
    for (std::size_t i = 0; i < rows; ++i) {
        double* y = out + i * cols;
        std::memset(y, 0, cols * sizeof(double));
        for (std::int64_t e = offsets[i]; e < offsets[i + 1]; ++e) {
            axpy(cols, values[e], x + static_cast<std::size_t>(indices[e]) * cols, y);
        }
    }
}

template <class Axpy>
inline void gemm(Axpy axpy, std::size_t m, std::size_t k, std::size_t n, const double* a,
                 const double* b, double* out) {
    for (std::size_t i = 0; i < m; ++i) {
        double* y = out + i * n;
        std::memset(y, 0, n * sizeof(double));
        const double* ai = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            if (ai[p] != 0.0) axpy(n, ai[p], b + p * n, y);
        }
    }
}

template <class Axpy>
inline void gemm_at_b(Axpy axpy, std::size_t m, std::size_t k, std::size_t n, const double* a,
                      const double* b, double* out) {
    std::memset(out, 0, k * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        const double* bi = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            if (ai[p] != 0.0) axpy(n, ai[p], bi, out + p * n);
        }
    }
}

} // namespace lsgnn::kernels::loops
