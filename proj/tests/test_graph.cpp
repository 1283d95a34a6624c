#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "lsgnn/digest.hpp"
#include "lsgnn/error.hpp"
#include "lsgnn/graph.hpp"
#include "oracle.hpp"

using namespace lsgnn;

namespace {

SparseGraph graph_of(const std::vector<std::pair<int, int>>& e, std::size_t n) { return build_graph(e, n); }

std::filesystem::path temp_file(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "lsgnn_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("build_graph symmetrizes, deduplicates and drops self-loops") {
    auto g = graph_of({{0, 1}, {1, 0}, {2, 2}, {1, 2}, {0, 1}}, 4);
    CHECK(g.num_nodes() == 4);
    CHECK(g.num_edges() == 2);
    CHECK(g.num_entries() == 4);
    CHECK(g.dropped_self_loops() == 1);
    CHECK(g.degree(1) == 2);
    CHECK(g.degree(3) == 0);
    auto nb = g.neighbors(1);
    CHECK(std::vector<NodeId>(nb.begin(), nb.end()) == std::vector<NodeId>{0, 2});
    CHECK(g.edge_list() == std::vector<Edge>{{0, 1}, {1, 2}});
    CHECK_THROWS_AS(graph_of({{0, 5}}, 3), InputError);
    CHECK_THROWS_AS(graph_of({{-1, 0}}, 3), InputError);
}

TEST_CASE("normalized adjacency matches a dense oracle") {
    SUBCASE("triangle") {
        auto a = sym_norm_adj(graph_of({{0, 1}, {1, 2}, {0, 2}}, 3));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(a.at(i, j) == doctest::Approx(i == j ? 0.0 : 0.5));
    }
    SUBCASE("random graphs") {
        std::mt19937_64 rng(1);
        for (int trial = 0; trial < 10; ++trial) {
            auto e = oracle::random_edges(25, 40, rng);
            auto s = sym_norm_adj(graph_of(e, 25));
            s.validate();
            auto ref = oracle::norm_adj(oracle::adjacency(e, 25));
            CHECK(oracle::max_abs(oracle::from(s.to_dense()), ref) <= 1e-15);
            for (std::size_t i = 0; i < 25; ++i)
                for (std::size_t j = 0; j < 25; ++j) CHECK(s.at(i, j) == s.at(j, i));
        }
    }
}

TEST_CASE("enhanced filters") {
    auto g = graph_of({{0, 1}}, 2);
    auto f = enhanced_filters(g, 0.5);
    CHECK(f.low.at(0, 0) == 0.5);
    CHECK(f.low.at(0, 1) == 1.0);
    CHECK(f.low.at(1, 0) == 1.0);
    CHECK(f.low.at(1, 1) == 0.5);
    CHECK(f.high.at(0, 1) == -1.0);
    CHECK(f.high.at(0, 0) == 0.5);

    auto f0 = enhanced_filters(g, 0.0);
    CHECK(oracle::max_abs(oracle::from(f0.low.to_dense()), oracle::from(sym_norm_adj(g).to_dense())) == 0.0);

    CHECK_THROWS_AS(enhanced_filters(g, -0.1), InputError);
    CHECK_THROWS_AS(enhanced_filters(g, 1.5), InputError);

    std::mt19937_64 rng(2);
    for (double beta : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        auto e = oracle::random_edges(30, 60, rng);
        auto fp = enhanced_filters(graph_of(e, 30), beta);
        auto sum = oracle::lin(1.0, oracle::from(fp.low.to_dense()), 1.0, oracle::from(fp.high.to_dense()));
        CHECK(oracle::max_abs(sum, oracle::identity(30)) <= 1e-12);
    }
}

TEST_CASE("self-looped adjacency") {
    auto empty = self_loop_adj(graph_of({}, 2));
    CHECK(oracle::max_abs(oracle::from(empty.to_dense()), oracle::identity(2)) == 0.0);
    auto one = self_loop_adj(graph_of({{0, 1}}, 2));
    CHECK(oracle::max_abs(oracle::from(one.to_dense()), oracle::Dense{{1, 1}, {1, 1}}) == 0.0);
    std::mt19937_64 rng(4);
    auto a = self_loop_adj(graph_of(oracle::random_edges(15, 20, rng), 15));
    for (std::size_t i = 0; i < 15; ++i) CHECK(a.at(i, i) == 1.0);
}

TEST_CASE("spmm matches dense product") {
    std::mt19937_64 rng(6);
    auto e = oracle::random_edges(40, 90, rng);
    auto s = sym_norm_adj(graph_of(e, 40));
    auto x = oracle::random_matrix(40, 7, rng);
    auto ref = oracle::mul(oracle::from(s.to_dense()), oracle::from(x));
    CHECK(oracle::max_abs(oracle::from(spmm(s, x)), ref) <= 1e-13);
    CHECK_THROWS_AS(spmm(s, Matrix(39, 7)), InputError);
}

TEST_CASE("node homophily") {
    auto tri = node_homophily(graph_of({{0, 1}, {1, 2}, {0, 2}}, 3), std::vector<std::int32_t>{4, 4, 4});
    CHECK(tri.per_node == std::vector<double>{1.0, 1.0, 1.0});
    CHECK(tri.graph_level == 1.0);

    // star: center 0 (A), leaves A, A, B; node 4 isolated
    auto star = node_homophily(graph_of({{0, 1}, {0, 2}, {0, 3}}, 5), std::vector<std::int32_t>{0, 0, 0, 1, 0});
    CHECK(star.per_node[0] == doctest::Approx(2.0 / 3.0));
    CHECK(star.per_node[3] == 0.0);
    CHECK(star.per_node[4] == 0.0);
    CHECK(star.graph_level == doctest::Approx((2.0 / 3.0 + 1 + 1 + 0) / 4.0));

    CHECK_THROWS_AS(node_homophily(graph_of({{0, 1}}, 2), std::vector<std::int32_t>{0}), InputError);
}

TEST_CASE("homophily is permutation equivariant") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 50;
        auto g = graph_of(oracle::random_edges(n, 120, rng), n);
        std::vector<std::int32_t> labels(n);
        std::uniform_int_distribution<int> lab(0, 2);
        for (auto& l : labels) l = lab(rng);
        std::vector<NodeId> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::int32_t> plabels(n);
        for (std::size_t i = 0; i < n; ++i) plabels[perm[i]] = labels[i];

        auto h = node_homophily(g, labels);
        auto hp = node_homophily(permute(g, perm), plabels);
        for (std::size_t i = 0; i < n; ++i) CHECK(hp.per_node[perm[i]] == h.per_node[i]);
        CHECK(hp.graph_level == doctest::Approx(h.graph_level).epsilon(1e-14));
    }
}

TEST_CASE("edge list text round trip") {
    auto path = temp_file("edges.txt");
    auto g = graph_of({{0, 3}, {2, 1}, {1, 3}}, 5);
    write_edge_list(path, g);
    std::size_t n = 0;
    auto e = read_edge_list(path, &n);
    CHECK(n == 4);
    CHECK(build_graph(e, 5).edge_list() == g.edge_list());

    {
        std::ofstream out(path);
        out << "# header\n0 1\n\n  2 3  # trailing\n";
    }
    CHECK(read_edge_list(path) == std::vector<Edge>{{0, 1}, {2, 3}});

    {
        std::ofstream out(path);
        out << "0 1\n1 x\n";
    }
    try {
        read_edge_list(path);
        FAIL("expected a format error");
    } catch (const FormatError& err) {
        CHECK(std::string(err.what()).find(":2:") != std::string::npos);
    }
    CHECK_THROWS(read_edge_list(temp_file("does_not_exist.txt")));
}

TEST_CASE("sha256 standard vectors") {
    const std::string abc = "abc";
    auto d = sha256({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()});
    CHECK(to_hex(d) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(to_hex(sha256({})) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

    Matrix a(2, 3, 1.0), b(3, 2, 1.0);
    CHECK(feature_digest(a) != feature_digest(b));
    CHECK(feature_digest(a) == feature_digest(Matrix(2, 3, 1.0)));
}
