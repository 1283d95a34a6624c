#include <doctest.h>

#include <cmath>
#include <random>

#include "lsgnn/error.hpp"
#include "lsgnn/synthetic.hpp"

using namespace lsgnn;

namespace {

struct Structure {
    std::size_t cross_subgraph = 0;
    double mean_degree = 0.0;
    std::vector<double> homophily;  // per subgraph, mean over non-isolated nodes
};

Structure inspect(const FsbmConfig& cfg, const SyntheticDataset& ds) {
    Structure s;
    auto h = node_homophily(ds.graph, ds.community);
    std::vector<double> sum(cfg.t, 0.0), cnt(cfg.t, 0.0);
    double deg = 0.0;
    for (std::size_t i = 0; i < cfg.n; ++i) {
        deg += ds.graph.degree(i);
        for (NodeId j : ds.graph.neighbors(i))
            if (ds.subgraph_id[i] != ds.subgraph_id[j]) ++s.cross_subgraph;
        if (ds.graph.degree(i) == 0) continue;
        sum[ds.subgraph_id[i]] += h.per_node[i];
        cnt[ds.subgraph_id[i]] += 1;
    }
    s.mean_degree = deg / static_cast<double>(cfg.n);
    for (std::size_t k = 0; k < cfg.t; ++k) s.homophily.push_back(sum[k] / cnt[k]);
    return s;
}

} // namespace

TEST_CASE("edge probabilities from homophily and degree") {
    auto [p, q] = solve_edge_probs(0.8, 1000, 10.0);
    CHECK(p == doctest::Approx(0.032));
    CHECK(q == doctest::Approx(0.008));
    CHECK(p + q == doctest::Approx(0.04));
    CHECK_THROWS_AS(solve_edge_probs(1.2, 1000, 10.0), InputError);
    CHECK_THROWS_AS(solve_edge_probs(0.5, 10, 10.0), InputError);
}

TEST_CASE("node layout") {
    FsbmConfig cfg;
    cfg.n = 12;
    cfg.r = 2;
    cfg.t = 2;
    CHECK(cfg.subgraph_of(0) == 0);
    CHECK(cfg.subgraph_of(5) == 0);
    CHECK(cfg.subgraph_of(6) == 1);
    CHECK(cfg.community_of(2) == 0);
    CHECK(cfg.community_of(3) == 1);
    CHECK(cfg.community_of(8) == 0);
    CHECK(cfg.community_of(11) == 1);
    cfg.n = 10;  // not divisible by r * t
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("bernoulli FSBM structure") {
    // One 500-node subgraph has homophily noise of about 0.012, so the 0.02
    // band is checked on the mean over five graphs.
    auto cfg = fsbm_two_by_two(1000, 0.8, 0.3, 10.0);
    std::vector<double> hom(2, 0.0);
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        auto ds = generate_fsbm(cfg, seed);
        auto s = inspect(cfg, ds);
        CHECK(s.cross_subgraph == 0);
        CHECK(std::abs(s.mean_degree - 10.0) <= 0.5);
        for (std::size_t k = 0; k < 2; ++k) hom[k] += s.homophily[k] / 5.0;
        CHECK(ds.x.rows() == 1000);
        CHECK(ds.x.cols() == 1);
    }
    CHECK(std::abs(hom[0] - 0.8) <= 0.02);
    CHECK(std::abs(hom[1] - 0.3) <= 0.02);
}

TEST_CASE("expectation-exact FSBM gives every node its expected counts") {
    for (double lambda : {0.2, 0.5, 0.8}) {
        auto cfg = fsbm_two_by_two(1000, lambda, 1.0 - lambda, 10.0, 1.0, -1.0, 1.0, FsbmMode::expectation_exact);
        auto ds = generate_fsbm(cfg, 7);
        auto s = inspect(cfg, ds);
        CHECK(s.cross_subgraph == 0);
        CHECK(std::abs(s.homophily[0] - lambda) <= 0.005);
        CHECK(std::abs(s.homophily[1] - (1.0 - lambda)) <= 0.005);
        const int in0 = static_cast<int>(std::nearbyint(249 * cfg.p[0]));
        const int out0 = static_cast<int>(std::nearbyint(250 * cfg.q[0]));
        for (std::size_t i = 0; i < 500; ++i) {
            int same = 0, diff = 0;
            for (NodeId j : ds.graph.neighbors(i)) (ds.community[i] == ds.community[j] ? same : diff)++;
            CHECK(same == in0);
            CHECK(diff == out0);
        }
    }
}

TEST_CASE("generation is deterministic per seed") {
    auto cfg = fsbm_two_by_two(400, 0.7, 0.2, 8.0);
    auto a = generate_fsbm(cfg, 11), b = generate_fsbm(cfg, 11), c = generate_fsbm(cfg, 12);
    CHECK(a.graph.edge_list() == b.graph.edge_list());
    CHECK(a.x == b.x);
    CHECK_FALSE(a.graph.edge_list() == c.graph.edge_list());
    auto bundle = a.to_bundle();
    CHECK(bundle.num_classes == 2);
    CHECK(bundle.labels == a.community);
}

TEST_CASE("closed-form LocalSim mean") {
    CHECK(theorem_localsim_mean(0.5, 1.0, 1.0, -1.0) == doctest::Approx(-4.0));
    CHECK(theorem_localsim_mean(1.0, 0.5, 1.0, -1.0) == doctest::Approx(-0.5));
    CHECK(theorem_localsim_mean(0.0, 1.0, 3.0, 1.0) == doctest::Approx(-6.0));
}

TEST_CASE("mean absolute pairwise gap against brute force") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    std::vector<double> a(37), b(53);
    for (double& v : a) v = nd(rng);
    for (double& v : b) v = 2.0 + nd(rng);
    double brute = 0.0;
    for (double x : a)
        for (double y : b) brute += std::abs(x - y);
    brute /= static_cast<double>(a.size() * b.size());
    CHECK(mean_abs_pairwise_gap(a, b) == doctest::Approx(brute).epsilon(1e-12));
    CHECK(mean_abs_pairwise_gap({1.0}, {4.0}) == 3.0);
}

TEST_CASE("theory check passes on expectation-exact graphs") {
    for (double sigma : {0.5, 1.0})
        for (double lambda : {0.2, 0.5, 0.8}) {
            CAPTURE(sigma);
            CAPTURE(lambda);
            auto cfg = fsbm_two_by_two(1000, lambda, 1.0 - lambda, 10.0, 1.0, -1.0, sigma, FsbmMode::expectation_exact);
            auto rep = theory_check(cfg, 30, 100);
            CHECK(rep.pass());
            CHECK(rep.subgraphs.size() == 2);
            CHECK(rep.subgraphs[0].analytic == doctest::Approx(-2 * sigma * sigma - (1 - lambda) * 4));
        }
}

TEST_CASE("raw feature baseline") {
    Matrix x(8, 1);
    Labels y(8);
    Mask tr(8, 0), te(8, 0);
    for (std::size_t i = 0; i < 8; ++i) {
        y[i] = i % 2;
        x(i, 0) = (i % 2 ? -1.0 : 1.0) * (1.0 + 0.1 * static_cast<double>(i));
        (i < 6 ? tr : te)[i] = 1;
    }
    CHECK(raw_feature_accuracy(x, y, tr, te) == 1.0);
}
