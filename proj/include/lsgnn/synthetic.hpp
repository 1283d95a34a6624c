#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lsgnn/dataset.hpp"
#include "lsgnn/graph.hpp"
#include "lsgnn/matrix.hpp"
#include "lsgnn/model.hpp"

namespace lsgnn {

enum class FsbmMode {
    bernoulli,          // every eligible pair drawn independently
    expectation_exact,  // every node gets exactly the rounded expected intra/inter counts
};

/**
 * Featured stochastic block model with a mixture of heterophily.
 *
 * Nodes are split into t equal subgraphs with no edges between them; each
 * subgraph is split into r equal communities. Inside subgraph k, same-
 * community pairs connect with probability p[k], cross-community pairs with
 * q[k]. Node i carries the scalar feature mu[community(i)] + N(0, sigma^2).
 *
 * Layout: subgraph(i) = i / (n / t); community(i) = (i mod (n / t)) / (n / (r t)).
 */
struct FsbmConfig {
    std::size_t n = 1000;
    std::size_t r = 2;
    std::size_t t = 2;
    std::vector<double> p{0.02, 0.02};
    std::vector<double> q{0.02, 0.02};
    std::vector<double> mu{1.0, -1.0};
    double sigma = 1.0;
    FsbmMode mode = FsbmMode::bernoulli;

    void validate() const;  // throws InputError
    double lambda(std::size_t subgraph) const { return p[subgraph] / (p[subgraph] + q[subgraph]); }
    std::size_t community_of(std::size_t node) const;
    std::size_t subgraph_of(std::size_t node) const;
};

struct SyntheticDataset {
    SparseGraph graph;
    Matrix x;                         // n x 1
    Labels community;
    std::vector<std::int32_t> subgraph_id;

    DatasetBundle to_bundle() const;
};

// p + q = 4 * expected_degree / n, p = lambda (p + q). Throws InputError when infeasible.
std::pair<double, double> solve_edge_probs(double lambda, std::size_t n, double expected_degree);

// The 2-community / 2-subgraph layout with per-subgraph homophily lambda1, lambda2.
FsbmConfig fsbm_two_by_two(std::size_t n, double lambda1, double lambda2, double expected_degree,
                           double mu1 = 1.0, double mu2 = -1.0, double sigma = 1.0,
                           FsbmMode mode = FsbmMode::bernoulli);

SyntheticDataset generate_fsbm(const FsbmConfig& cfg, std::uint64_t seed);

// Mean LocalSim per subgraph under -(x_i - x_j)^2, against
// -2 sigma^2 - (1 - lambda) (mu1 - mu2)^2.
struct SubgraphTheory {
    double lambda = 0.0;
    double empirical = 0.0;
    double analytic = 0.0;
    double stderr_ = 0.0;
    bool pass = false;  // |empirical - analytic| <= max(3 stderr, 2% |analytic|)
};

struct TheoryReport {
    std::vector<SubgraphTheory> subgraphs;
    std::size_t trials = 0;
    bool pass() const;
};

double theorem_localsim_mean(double lambda, double sigma, double mu1, double mu2);

// Trial k uses seed base_seed + k.
TheoryReport theory_check(const FsbmConfig& cfg, std::size_t trials, std::uint64_t base_seed = 0,
                          std::size_t threads = 1);

struct L1GapReport {
    double empirical = 0.0;  // mean over trials of the mean |phi_i - phi_j| across subgraphs
    double stderr_ = 0.0;
    double bound = 0.0;      // |lambda1 - lambda2| (mu1 - mu2)^2
    std::size_t trials = 0;
    bool pass = false;       // empirical >= bound - 3 stderr
};

L1GapReport l1_gap_check(const FsbmConfig& cfg, std::size_t trials, std::uint64_t base_seed = 0,
                         std::size_t threads = 1);

// Mean |a_i - b_j| over all pairs, in O((|a| + |b|) log).
double mean_abs_pairwise_gap(std::vector<double> a, std::vector<double> b);

struct ToyOptions {
    std::size_t n = 1000;
    double expected_degree = 10.0;
    double sigma = 1.0;
    double mu1 = 1.0, mu2 = -1.0;
    std::size_t hidden = 16;
    TrainConfig train{0.01, 5e-4, 300, 100, 0};
};

struct ToyRow {
    double lambda1 = 0.0, lambda2 = 0.0;
    double raw = 0.0, graph_level = 0.0, node_level = 0.0;  // mean test accuracy
    std::vector<double> raw_per_seed, graph_per_seed, node_per_seed;
};

// For every grid cell and seed: generate the bernoulli FSBM, split 48/32/20,
// and train (a) a logistic model on the raw feature, (b) the fusion model with
// one learned graph-level weight vector and (c) the fusion model with weights
// from naive LocalSim under -(x - y)^2. Both fusion models see one propagation
// layer over A + I and its complement I - (A + I).
std::vector<ToyRow> toy_study(const std::vector<std::pair<double, double>>& grid,
                              const std::vector<std::uint64_t>& seeds, const ToyOptions& opts = {},
                              std::size_t threads = 1);

// Two-class logistic regression on one scalar feature (Newton's method with a
// small ridge term); returns test accuracy.
double raw_feature_accuracy(const Matrix& x, const Labels& labels, const Mask& train, const Mask& test);

} // namespace lsgnn
