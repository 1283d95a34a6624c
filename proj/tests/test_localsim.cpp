#include <doctest.h>

#include <cmath>
#include <random>

#include "lsgnn/error.hpp"
#include "lsgnn/localsim.hpp"
#include "oracle.hpp"

using namespace lsgnn;

namespace {

double sim_ref(std::span<const double> x, std::span<const double> y, SimilarityKind k) {
    double dot = 0, nx = 0, ny = 0, sq = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        nx += x[i] * x[i];
        ny += y[i] * y[i];
        sq += (x[i] - y[i]) * (x[i] - y[i]);
    }
    switch (k) {
    case SimilarityKind::cosine: return (nx == 0 || ny == 0) ? 0.0 : dot / std::sqrt(nx * ny);
    case SimilarityKind::euclidean: return -std::sqrt(sq);
    case SimilarityKind::neg_sq_scalar: return -sq;
    }
    return 0.0;
}

} // namespace

TEST_CASE("similarity values") {
    const std::vector<double> x{1, 0}, y{0, 1}, z{2, 0}, zero{0, 0};
    CHECK(similarity(x, y, SimilarityKind::cosine) == 0.0);
    CHECK(similarity(x, z, SimilarityKind::cosine) == doctest::Approx(1.0));
    CHECK(similarity(x, zero, SimilarityKind::cosine) == 0.0);
    CHECK(similarity(x, x, SimilarityKind::euclidean) == 0.0);
    CHECK(similarity(x, y, SimilarityKind::euclidean) == doctest::Approx(-std::sqrt(2.0)));
    const std::vector<double> a{1.5}, b{-0.5};
    CHECK(similarity(a, b, SimilarityKind::neg_sq_scalar) == doctest::Approx(-4.0));
    CHECK_THROWS_AS(similarity(x, y, SimilarityKind::neg_sq_scalar), InputError);
    CHECK_THROWS_AS(similarity(x, a, SimilarityKind::cosine), InputError);
    CHECK_THROWS_AS(parse_similarity("manhattan"), InputError);
    for (auto k : {SimilarityKind::cosine, SimilarityKind::euclidean, SimilarityKind::neg_sq_scalar})
        CHECK(parse_similarity(to_string(k)) == k);
}

TEST_CASE("similarity properties on random vectors") {
    std::mt19937_64 rng(31);
    auto m = oracle::random_matrix(50, 6, rng);
    for (std::size_t i = 0; i + 1 < 50; ++i) {
        auto x = m.row(i), y = m.row(i + 1);
        for (auto k : {SimilarityKind::cosine, SimilarityKind::euclidean}) {
            CHECK(similarity(x, y, k) == similarity(y, x, k));
            CHECK(similarity(x, y, k) == doctest::Approx(sim_ref(x, y, k)).epsilon(1e-12));
        }
        const double c = similarity(x, y, SimilarityKind::cosine);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
        CHECK(similarity(x, y, SimilarityKind::euclidean) <= 0.0);
    }
}

TEST_CASE("naive LocalSim is the neighborhood mean of similarities") {
    std::mt19937_64 rng(32);
    const std::size_t n = 30;
    auto e = oracle::random_edges(n, 40, rng);
    auto g = build_graph(e, n);
    auto a = oracle::adjacency(e, n);
    for (auto k : {SimilarityKind::cosine, SimilarityKind::euclidean}) {
        auto x = oracle::random_matrix(n, 4, rng);
        auto phi = naive_localsim(g, x, k);
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0, cnt = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (a[i][j] != 0) {
                    sum += sim_ref(x.row(i), x.row(j), k);
                    cnt += 1;
                }
            CHECK(phi[i] == doctest::Approx(cnt > 0 ? sum / cnt : 0.0).epsilon(1e-12));
            if (k == SimilarityKind::cosine) {
                CHECK(phi[i] >= -1.0);
                CHECK(phi[i] <= 1.0);
            } else {
                CHECK(phi[i] <= 0.0);
            }
        }
    }
}

TEST_CASE("edge similarity features are symmetric and aligned with CSR") {
    std::mt19937_64 rng(33);
    const std::size_t n = 20;
    auto g = build_graph(oracle::random_edges(n, 35, rng), n);
    auto x = oracle::random_matrix(n, 1, rng);
    auto f = edge_sim_features(g, x, SimilarityKind::neg_sq_scalar);
    REQUIRE(f.size() == g.num_entries());
    auto off = g.row_offsets();
    auto col = g.col_indices();
    for (std::size_t i = 0; i < n; ++i)
        for (auto p = off[i]; p < off[i + 1]; ++p) {
            const auto j = static_cast<std::size_t>(col[p]);
            CHECK(f.d[p] == doctest::Approx(-(x(i, 0) - x(j, 0)) * (x(i, 0) - x(j, 0))));
            CHECK(f.d_sq[p] == f.d[p] * f.d[p]);
            auto nb = g.neighbors(j);
            const auto q = off[j] + (std::lower_bound(nb.begin(), nb.end(), static_cast<NodeId>(i)) - nb.begin());
            CHECK(f.d[q] == f.d[p]);
        }
}

TEST_CASE("isolated nodes get zero LocalSim") {
    auto g = build_graph(std::vector<Edge>{{0, 1}}, 3);
    Matrix x = Matrix::from_rows({{1.0}, {3.0}, {5.0}});
    auto phi = naive_localsim(g, x, SimilarityKind::neg_sq_scalar);
    CHECK(phi[0] == -4.0);
    CHECK(phi[1] == -4.0);
    CHECK(phi[2] == 0.0);
    CHECK_THROWS_AS(neighborhood_mean(g, std::vector<double>(3)), InputError);
}
