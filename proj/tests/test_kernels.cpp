#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "lsgnn/error.hpp"
#include "lsgnn/kernels.hpp"
#include "lsgnn/matrix.hpp"

using namespace lsgnn;
namespace k = lsgnn::kernels;

namespace {

std::vector<const k::Table*> simd_tables() {
    std::vector<const k::Table*> out;
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
    if (k::supported(k::Level::avx2) && k::avx2_table()) out.push_back(k::avx2_table());
#endif
#if defined(__aarch64__)
    if (k::supported(k::Level::neon) && k::neon_table()) out.push_back(k::neon_table());
#endif
    return out;
}

std::vector<double> randv(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (double& x : v) x = nd(rng);
    return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Csr {
    std::vector<std::int64_t> off{0};
    std::vector<std::int32_t> idx;
    std::vector<double> val;
};

Csr random_csr(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    Csr c;
    std::bernoulli_distribution keep(0.3);
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (keep(rng)) {
                c.idx.push_back(static_cast<std::int32_t>(j));
                c.val.push_back(nd(rng));
            }
        }
        c.off.push_back(static_cast<std::int64_t>(c.idx.size()));
    }
    return c;
}

} // namespace

TEST_CASE("scalar kernels agree with naive loops") {
    std::mt19937_64 rng(3);
    const auto& s = k::scalar_table();
    const std::size_t m = 7, kk = 5, n = 11;
    auto a = randv(m * kk, rng), b = randv(kk * n, rng);
    std::vector<double> c(m * n, 1.0);
    s.gemm(m, kk, n, a.data(), b.data(), c.data());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double ref = 0.0;
            for (std::size_t l = 0; l < kk; ++l) ref += a[i * kk + l] * b[l * n + j];
            CHECK(c[i * n + j] == doctest::Approx(ref).epsilon(1e-12));
        }

    auto b2 = randv(m * n, rng);
    std::vector<double> d(kk * n, 5.0);
    s.gemm_at_b(m, kk, n, a.data(), b2.data(), d.data());
    for (std::size_t i = 0; i < kk; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double ref = 0.0;
            for (std::size_t l = 0; l < m; ++l) ref += a[l * kk + i] * b2[l * n + j];
            CHECK(d[i * n + j] == doctest::Approx(ref).epsilon(1e-12));
        }

    auto csr = random_csr(9, 6, rng);
    auto x = randv(6 * 3, rng);
    std::vector<double> out(9 * 3, -1.0);
    s.spmm(9, csr.off.data(), csr.idx.data(), csr.val.data(), x.data(), 3, out.data());
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double ref = 0.0;
            for (auto e = csr.off[i]; e < csr.off[i + 1]; ++e) ref += csr.val[e] * x[csr.idx[e] * 3 + j];
            CHECK(out[i * 3 + j] == doctest::Approx(ref).epsilon(1e-12));
        }

    std::vector<double> y{1, 2, 3};
    std::vector<double> xs{1, 1, 1};
    s.axpby(3, 2.0, xs.data(), -1.0, y.data());
    CHECK(y == std::vector<double>{1, 0, -1});
    s.scale(3, 3.0, y.data());
    CHECK(y == std::vector<double>{3, 0, -3});
    s.axpy(3, 0.5, xs.data(), y.data());
    CHECK(y == std::vector<double>{3.5, 0.5, -2.5});
}

TEST_CASE("simd kernels are bitwise equal to scalar") {
    const auto tables = simd_tables();
    if (tables.empty()) {
        MESSAGE("no SIMD level available on this CPU; nothing to compare");
        return;
    }
    const auto& s = k::scalar_table();
    std::mt19937_64 rng(11);
    // Widths straddle the 8/4/1 lane boundaries of the vector loops.
    for (std::size_t w : {1u, 3u, 4u, 5u, 8u, 9u, 13u, 16u, 31u, 64u, 67u}) {
        for (const k::Table* t : tables) {
            CAPTURE(w);
            CAPTURE(k::name(t->level));
            auto x = randv(w, rng), y0 = randv(w, rng);
            auto ys = y0, yv = y0;
            s.axpy(w, 0.37, x.data(), ys.data());
            t->axpy(w, 0.37, x.data(), yv.data());
            CHECK(same_bits(ys, yv));

            ys = y0, yv = y0;
            s.axpby(w, -1.3, x.data(), 0.7, ys.data());
            t->axpby(w, -1.3, x.data(), 0.7, yv.data());
            CHECK(same_bits(ys, yv));

            ys = y0, yv = y0;
            s.scale(w, 1.0 / 3.0, ys.data());
            t->scale(w, 1.0 / 3.0, yv.data());
            CHECK(same_bits(ys, yv));

            const std::size_t m = 6, kk = 10;
            auto a = randv(m * kk, rng), b = randv(kk * w, rng);
            a[3] = 0.0;  // exercises the zero-skip path
            std::vector<double> cs(m * w), cv(m * w, 9.0);
            s.gemm(m, kk, w, a.data(), b.data(), cs.data());
            t->gemm(m, kk, w, a.data(), b.data(), cv.data());
            CHECK(same_bits(cs, cv));

            auto b2 = randv(m * w, rng);
            std::vector<double> ds(kk * w), dv(kk * w, 9.0);
            s.gemm_at_b(m, kk, w, a.data(), b2.data(), ds.data());
            t->gemm_at_b(m, kk, w, a.data(), b2.data(), dv.data());
            CHECK(same_bits(ds, dv));

            auto csr = random_csr(12, 10, rng);
            auto xs2 = randv(10 * w, rng);
            std::vector<double> os(12 * w), ov(12 * w, 9.0);
            s.spmm(12, csr.off.data(), csr.idx.data(), csr.val.data(), xs2.data(), w, os.data());
            t->spmm(12, csr.off.data(), csr.idx.data(), csr.val.data(), xs2.data(), w, ov.data());
            CHECK(same_bits(os, ov));
        }
    }
}

TEST_CASE("matmul results do not depend on the dispatched level") {
    std::mt19937_64 rng(5);
    Matrix a(17, 9), b(9, 23);
    std::normal_distribution<double> nd;
    for (double& v : a.values()) v = nd(rng);
    for (double& v : b.values()) v = nd(rng);

    const k::Level before = k::active().level;
    k::force(k::Level::scalar);
    const Matrix ref = matmul(a, b);
    const Matrix ref_t = matmul_at_b(b, b);
    for (k::Level lv : {k::Level::avx2, k::Level::neon}) {
        if (!k::supported(lv)) continue;
        k::force(lv);
        CHECK(matmul(a, b) == ref);
        CHECK(matmul_at_b(b, b) == ref_t);
    }
    k::force(before);
}

TEST_CASE("forcing an unsupported level throws") {
    for (k::Level lv : {k::Level::avx2, k::Level::neon}) {
        if (!k::supported(lv)) CHECK_THROWS_AS(k::force(lv), InputError);
    }
    CHECK(k::supported(k::Level::scalar));
    CHECK(k::name(k::Level::scalar) == "scalar");
}
