#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace lsgnn {

/// Dense row-major matrix of doubles. Used for node features, propagated
/// layers, weights and gradients alike.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    void fill(double v);
    bool all_finite() const noexcept;

    // Bitwise equality including shape.
    friend bool operator==(const Matrix& a, const Matrix& b) noexcept;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using FeatureMatrix = Matrix;

// Dense helpers. All products route through the dispatched kernels, so their
// results are identical regardless of which SIMD level is active.
Matrix matmul(const Matrix& a, const Matrix& b);             // a * b
Matrix matmul_at_b(const Matrix& a, const Matrix& b);        // a^T * b
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);        // a * b^T
Matrix transpose(const Matrix& a);
void add_scaled(Matrix& y, double alpha, const Matrix& x);   // y += alpha * x
double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);

} // namespace lsgnn
