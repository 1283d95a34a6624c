#include "lsgnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "lsgnn/error.hpp"
#include "lsgnn/localsim.hpp"
#include "lsgnn/parallel.hpp"

namespace lsgnn {

void FsbmConfig::validate() const {
    if (r < 1 || t < 1) throw InputError("fsbm: need at least one community and one subgraph");
    if (n == 0 || n % (r * t) != 0) throw InputError("fsbm: n must be a positive multiple of r * t");
    if (p.size() != t || q.size() != t) throw InputError("fsbm: p and q need one entry per subgraph");
    if (mu.size() != r) throw InputError("fsbm: mu needs one entry per community");
    for (std::size_t k = 0; k < t; ++k) {
        if (!(p[k] >= 0.0 && p[k] <= 1.0 && q[k] >= 0.0 && q[k] <= 1.0)) {
            throw InputError("fsbm: edge probabilities must lie in [0, 1]");
        }
    }
    if (!(sigma >= 0.0)) throw InputError("fsbm: sigma must be >= 0");
}

std::size_t FsbmConfig::subgraph_of(std::size_t node) const { return node / (n / t); }

std::size_t FsbmConfig::community_of(std::size_t node) const { return (node % (n / t)) / (n / (r * t)); }

DatasetBundle SyntheticDataset::to_bundle() const {
    DatasetBundle b;
    b.graph = graph;
    b.features = x;
    b.labels = community;
    std::int32_t mx = -1;
    for (auto c : community) mx = std::max(mx, c);
    b.num_classes = static_cast<std::size_t>(mx + 1);
    b.name = "fsbm";
    return b;
}

std::pair<double, double> solve_edge_probs(double lambda, std::size_t n, double expected_degree) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("lambda must lie in [0, 1]");
    if (n == 0 || !(expected_degree >= 0.0)) throw InputError("need n > 0 and a nonnegative degree");
    const double total = 4.0 * expected_degree / static_cast<double>(n);
    const double p = lambda * total;
    const double q = (1.0 - lambda) * total;
    if (p > 1.0 || q > 1.0) {
        throw InputError("expected degree " + std::to_string(expected_degree) + " is infeasible for n=" +
                         std::to_string(n));
    }
    return {p, q};
}

FsbmConfig fsbm_two_by_two(std::size_t n, double lambda1, double lambda2, double expected_degree, double mu1,
                           double mu2, double sigma, FsbmMode mode) {
    FsbmConfig cfg;
    cfg.n = n;
    cfg.r = 2;
    cfg.t = 2;
    const auto [p1, q1] = solve_edge_probs(lambda1, n, expected_degree);
    const auto [p2, q2] = solve_edge_probs(lambda2, n, expected_degree);
    cfg.p = {p1, p2};
    cfg.q = {q1, q2};
    cfg.mu = {mu1, mu2};
    cfg.sigma = sigma;
    cfg.mode = mode;
    cfg.validate();
    return cfg;
}

namespace {

std::uint64_t edge_key(NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Uniform random pairing of half-edges ("stubs") that never creates a
// self-loop, a duplicate edge or a pair rejected by `allowed`. Returns false
// if it runs out of legal partners; the caller reshuffles and retries. With
// an odd stub count the final stub stays unmatched.
template <class Allowed>
bool pair_stubs(std::vector<NodeId> stubs, Allowed allowed, std::mt19937_64& rng, std::vector<Edge>& out) {
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::unordered_set<std::uint64_t> present;
    std::vector<Edge> made;
    made.reserve(stubs.size() / 2);
    auto legal = [&](NodeId u, NodeId v) { return u != v && allowed(u, v) && !present.contains(edge_key(u, v)); };
    constexpr int kRandomProbes = 64;
    while (stubs.size() >= 2) {
        const NodeId u = stubs.back();
        stubs.pop_back();
        std::uniform_int_distribution<std::size_t> pick(0, stubs.size() - 1);
        std::size_t found = stubs.size();
        for (int probe = 0; probe < kRandomProbes && found == stubs.size(); ++probe) {
            const std::size_t j = pick(rng);
            if (legal(u, stubs[j])) found = j;
        }
        if (found == stubs.size()) {
            for (std::size_t j = 0; j < stubs.size(); ++j) {
                if (legal(u, stubs[j])) {
                    found = j;
                    break;
                }
            }
        }
        if (found == stubs.size()) return false;
        const NodeId v = stubs[found];
        stubs[found] = stubs.back();
        stubs.pop_back();
        present.insert(edge_key(u, v));
        made.emplace_back(u, v);
    }
    out.insert(out.end(), made.begin(), made.end());
    return true;
}

template <class Allowed>
void pair_with_retries(const std::vector<NodeId>& stubs, Allowed allowed, std::mt19937_64& rng,
                       std::vector<Edge>& out) {
    constexpr int kMaxAttempts = 200;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        if (pair_stubs(stubs, allowed, rng, out)) return;
    }
    throw InputError("fsbm: expectation_exact pairing failed after " + std::to_string(kMaxAttempts) + " attempts");
}

std::vector<Edge> exact_edges(const FsbmConfig& cfg, std::mt19937_64& rng) {
    const std::size_t sub_size = cfg.n / cfg.t;
    const std::size_t block = cfg.n / (cfg.r * cfg.t);
    const std::size_t m_intra = block - 1;
    const std::size_t m_inter = sub_size - block;
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < cfg.t; ++k) {
        // nearbyint honours the default round-half-to-even mode.
        const auto k_in = static_cast<std::size_t>(std::nearbyint(static_cast<double>(m_intra) * cfg.p[k]));
        const auto k_out = static_cast<std::size_t>(std::nearbyint(static_cast<double>(m_inter) * cfg.q[k]));
        if (k_in > m_intra || k_out > m_inter) throw InputError("fsbm: expected degree exceeds eligible partners");
        const std::size_t base = k * sub_size;
        for (std::size_t c = 0; c < cfg.r; ++c) {
            std::vector<NodeId> stubs;
            for (std::size_t i = 0; i < block; ++i)
                stubs.insert(stubs.end(), k_in, static_cast<NodeId>(base + c * block + i));
            pair_with_retries(stubs, [](NodeId, NodeId) { return true; }, rng, edges);
        }
        std::vector<NodeId> stubs;
        for (std::size_t i = 0; i < sub_size; ++i) stubs.insert(stubs.end(), k_out, static_cast<NodeId>(base + i));
        auto cross = [&cfg](NodeId a, NodeId b) { return cfg.community_of(a) != cfg.community_of(b); };
        pair_with_retries(stubs, cross, rng, edges);
    }
    return edges;
}

std::vector<Edge> bernoulli_edges(const FsbmConfig& cfg, std::mt19937_64& rng) {
    const std::size_t sub_size = cfg.n / cfg.t;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Edge> edges;
    for (std::size_t k = 0; k < cfg.t; ++k) {
        const std::size_t base = k * sub_size;
        for (std::size_t a = base; a < base + sub_size; ++a) {
            for (std::size_t b = a + 1; b < base + sub_size; ++b) {
                const double prob = cfg.community_of(a) == cfg.community_of(b) ? cfg.p[k] : cfg.q[k];
                if (unif(rng) < prob) edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
            }
        }
    }
    return edges;
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

} // namespace

SyntheticDataset generate_fsbm(const FsbmConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    SyntheticDataset ds;
    const auto edges = cfg.mode == FsbmMode::bernoulli ? bernoulli_edges(cfg, rng) : exact_edges(cfg, rng);
    ds.graph = build_graph(edges, cfg.n);
    ds.x = Matrix(cfg.n, 1);
    ds.community.resize(cfg.n);
    ds.subgraph_id.resize(cfg.n);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const std::size_t c = cfg.community_of(i);
        ds.community[i] = static_cast<std::int32_t>(c);
        ds.subgraph_id[i] = static_cast<std::int32_t>(cfg.subgraph_of(i));
        ds.x(i, 0) = cfg.mu[c] + cfg.sigma * noise(rng);
    }
    return ds;
}

double theorem_localsim_mean(double lambda, double sigma, double mu1, double mu2) {
    return -2.0 * sigma * sigma - (1.0 - lambda) * (mu1 - mu2) * (mu1 - mu2);
}

bool TheoryReport::pass() const {
    return !subgraphs.empty() &&
           std::all_of(subgraphs.begin(), subgraphs.end(), [](const SubgraphTheory& s) { return s.pass; });
}

TheoryReport theory_check(const FsbmConfig& cfg, std::size_t trials, std::uint64_t base_seed, std::size_t threads) {
    cfg.validate();
    if (cfg.r != 2) throw InputError("theory_check needs exactly two communities");
    if (trials == 0) throw InputError("theory_check needs at least one trial");
    // per_trial[trial][subgraph] = mean phi over the subgraph's non-isolated nodes
    std::vector<std::vector<double>> per_trial(trials, std::vector<double>(cfg.t, 0.0));
    parallel_for(trials, threads, [&](std::size_t trial) {
        const SyntheticDataset ds = generate_fsbm(cfg, base_seed + trial);
        const auto phi = naive_localsim(ds.graph, ds.x, SimilarityKind::neg_sq_scalar);
        std::vector<double> sum(cfg.t, 0.0);
        std::vector<std::size_t> count(cfg.t, 0);
        for (std::size_t i = 0; i < cfg.n; ++i) {
            if (ds.graph.degree(i) == 0) continue;
            sum[ds.subgraph_id[i]] += phi[i];
            ++count[ds.subgraph_id[i]];
        }
        for (std::size_t k = 0; k < cfg.t; ++k) per_trial[trial][k] = count[k] ? sum[k] / count[k] : 0.0;
    });

    TheoryReport rep;
    rep.trials = trials;
    for (std::size_t k = 0; k < cfg.t; ++k) {
        std::vector<double> vals(trials);
        for (std::size_t tr = 0; tr < trials; ++tr) vals[tr] = per_trial[tr][k];
        SubgraphTheory s;
        s.lambda = cfg.lambda(k);
        s.empirical = mean(vals);
        s.stderr_ = standard_error(vals);
        s.analytic = theorem_localsim_mean(s.lambda, cfg.sigma, cfg.mu[0], cfg.mu[1]);
        s.pass = std::abs(s.empirical - s.analytic) <= std::max(3.0 * s.stderr_, 0.02 * std::abs(s.analytic));
        rep.subgraphs.push_back(s);
    }
    return rep;
}

double mean_abs_pairwise_gap(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return 0.0;
    std::sort(b.begin(), b.end());
    std::vector<double> prefix(b.size() + 1, 0.0);
    for (std::size_t j = 0; j < b.size(); ++j) prefix[j + 1] = prefix[j] + b[j];
    const double total_b = prefix.back();
    double acc = 0.0;
    for (double x : a) {
        const auto below = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), x) - b.begin());
        const double lo = x * static_cast<double>(below) - prefix[below];
        const double hi = (total_b - prefix[below]) - x * static_cast<double>(b.size() - below);
        acc += lo + hi;
    }
    return acc / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

L1GapReport l1_gap_check(const FsbmConfig& cfg, std::size_t trials, std::uint64_t base_seed, std::size_t threads) {
    cfg.validate();
    if (cfg.r != 2 || cfg.t != 2) throw InputError("l1_gap_check needs the 2-community / 2-subgraph layout");
    if (trials == 0) throw InputError("l1_gap_check needs at least one trial");
    std::vector<double> per_trial(trials, 0.0);
    parallel_for(trials, threads, [&](std::size_t trial) {
        const SyntheticDataset ds = generate_fsbm(cfg, base_seed + trial);
        const auto phi = naive_localsim(ds.graph, ds.x, SimilarityKind::neg_sq_scalar);
        std::vector<double> first, second;
        for (std::size_t i = 0; i < cfg.n; ++i) {
            if (ds.graph.degree(i) == 0) continue;
            (ds.subgraph_id[i] == 0 ? first : second).push_back(phi[i]);
        }
        per_trial[trial] = mean_abs_pairwise_gap(std::move(first), std::move(second));
    });
    L1GapReport rep;
    rep.trials = trials;
    rep.empirical = mean(per_trial);
    rep.stderr_ = standard_error(per_trial);
    const double gap = cfg.mu[0] - cfg.mu[1];
    rep.bound = std::abs(cfg.lambda(0) - cfg.lambda(1)) * gap * gap;
    rep.pass = rep.empirical >= rep.bound - 3.0 * rep.stderr_;
    return rep;
}

double raw_feature_accuracy(const Matrix& x, const Labels& labels, const Mask& train, const Mask& test) {
    if (x.cols() != 1) throw InputError("raw baseline expects one scalar feature");
    // Maximize the penalized log-likelihood of P(y=1) = sigmoid(a x + b).
    constexpr double kRidge = 1e-6;
    double a = 0.0, b = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        double ga = kRidge * a, gb = kRidge * b;
        double haa = kRidge, hab = 0.0, hbb = kRidge;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            if (!train[i]) continue;
            const double xi = x(i, 0);
            const double prob = 1.0 / (1.0 + std::exp(-(a * xi + b)));
            const double resid = prob - (labels[i] == 1 ? 1.0 : 0.0);
            const double w = prob * (1.0 - prob);
            ga += resid * xi;
            gb += resid;
            haa += w * xi * xi;
            hab += w * xi;
            hbb += w;
        }
        const double det = haa * hbb - hab * hab;
        if (!(det > 0.0)) break;
        const double da = (hbb * ga - hab * gb) / det;
        const double db = (haa * gb - hab * ga) / det;
        a -= da;
        b -= db;
        if (std::abs(da) + std::abs(db) < 1e-12) break;
    }
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        if (!test[i]) continue;
        ++total;
        const std::int32_t pred = a * x(i, 0) + b > 0.0 ? 1 : 0;
        correct += pred == labels[i] ? 1 : 0;
    }
    if (total == 0) throw InputError("raw baseline: empty test mask");
    return static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<ToyRow> toy_study(const std::vector<std::pair<double, double>>& grid,
                              const std::vector<std::uint64_t>& seeds, const ToyOptions& opts, std::size_t threads) {
    if (grid.empty() || seeds.empty()) throw InputError("toy_study needs a nonempty grid and seed list");
    struct Cell {
        double raw = 0.0, graph = 0.0, node = 0.0;
    };
    std::vector<Cell> cells(grid.size() * seeds.size());
    parallel_for(cells.size(), threads, [&](std::size_t idx) {
        const auto [lambda1, lambda2] = grid[idx / seeds.size()];
        const std::uint64_t seed = seeds[idx % seeds.size()];
        const FsbmConfig cfg = fsbm_two_by_two(opts.n, lambda1, lambda2, opts.expected_degree, opts.mu1, opts.mu2,
                                               opts.sigma, FsbmMode::bernoulli);
        const SyntheticDataset ds = generate_fsbm(cfg, seed);
        const SplitSpec split = make_splits(opts.n, kDefaultSplitRatios, seed, 1).front();

        Cell& out = cells[idx];
        out.raw = raw_feature_accuracy(ds.x, ds.community, split.train, split.test);

        // One propagation layer over A + I (low) and I - (A + I) (high).
        FilterPair filters;
        filters.low = self_loop_adj(ds.graph);
        filters.high = add_identity(scaled(filters.low, -1.0), 1.0);
        PropagationConfig pcfg;
        pcfg.K = 1;
        pcfg.gamma = 0.0;
        pcfg.beta = 0.0;
        pcfg.normalize = false;
        const PropagationStack stack = precompute_with_filters(filters, ds.x, pcfg);

        ModelConfig mcfg;
        mcfg.K = 1;
        mcfg.d = 1;
        mcfg.z = opts.hidden;
        mcfg.C = 2;
        mcfg.sim_kind = SimilarityKind::neg_sq_scalar;
        mcfg.dropout = 0.0;
        mcfg.localsim_mode = LocalSimMode::naive;
        TrainConfig tcfg = opts.train;
        tcfg.seed = seed;
        for (WeightMode mode : {WeightMode::graph_level, WeightMode::node_level}) {
            mcfg.weight_mode = mode;
            const ModelInputs inputs = prepare_inputs(ds.graph, ds.x, stack, mcfg);
            const TrainResult tr = train(mcfg, tcfg, inputs, ds.community, split.train, split.val);
            const double acc = evaluate(tr.params, mcfg, inputs, ds.community, split.test);
            (mode == WeightMode::graph_level ? out.graph : out.node) = acc;
        }
    });

    std::vector<ToyRow> rows;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        ToyRow row;
        row.lambda1 = grid[g].first;
        row.lambda2 = grid[g].second;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const Cell& c = cells[g * seeds.size() + s];
            row.raw_per_seed.push_back(c.raw);
            row.graph_per_seed.push_back(c.graph);
            row.node_per_seed.push_back(c.node);
        }
        row.raw = mean(row.raw_per_seed);
        row.graph_level = mean(row.graph_per_seed);
        row.node_level = mean(row.node_per_seed);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace lsgnn
