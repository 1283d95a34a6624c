#include "lsgnn/experiment.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "lsgnn/error.hpp"
#include "lsgnn/parallel.hpp"

namespace lsgnn {

namespace {

std::string cache_key(const SparseGraph& g, const Matrix& x, const PropagationConfig& cfg) {
    std::string key = to_hex(g.digest());
    key += ':';
    key += to_hex(feature_digest(x));
    key += ':' + std::to_string(cfg.K) + ':' + format_double(cfg.gamma) + ':' + format_double(cfg.beta) + ':' +
           std::string(to_string(cfg.variant)) + ':' + (cfg.normalize ? "1" : "0");
    return key;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

} // namespace

std::shared_ptr<const PropagationStack> PropagationCache::get_or_compute(const SparseGraph& g, const Matrix& x,
                                                                         const PropagationConfig& cfg) {
    const std::string key = cache_key(g, x, cfg);
    {
        std::lock_guard lock(mu_);
        if (auto it = entries_.find(key); it != entries_.end()) {
            ++hits_;
            return it->second;
        }
    }
    // Computed outside the lock; concurrent misses on one key produce identical
    // stacks and the first insertion wins.
    auto stack = std::make_shared<const PropagationStack>(precompute_bundle(g, x, cfg));
    std::lock_guard lock(mu_);
    auto [it, inserted] = entries_.emplace(key, std::move(stack));
    if (inserted) ++misses_;
    else ++hits_;
    return it->second;
}

void PropagationCache::insert(const SparseGraph& g, const Matrix& x, PropagationStack stack) {
    if (stack.feature_digest != feature_digest(x)) throw DigestError("propagation stack was built from other features");
    if (stack.low_layers.empty() || stack.low_layers.front().rows() != g.num_nodes())
        throw InputError("propagation stack does not match the graph");
    const std::string key = cache_key(g, x, stack.config);
    std::lock_guard lock(mu_);
    entries_.insert_or_assign(key, std::make_shared<const PropagationStack>(std::move(stack)));
}

MetricsReport run_experiment(const DatasetBundle& data, const ExperimentConfig& cfg,
                             const std::vector<SplitSpec>& splits, PropagationCache* cache, std::size_t threads) {
    data.validate();
    if (splits.empty()) throw InputError("run_experiment needs at least one split");
    const auto start = std::chrono::steady_clock::now();

    ModelConfig mcfg = cfg.model;
    mcfg.K = cfg.propagation.K;
    mcfg.d = data.features.cols();
    mcfg.C = data.num_classes;
    mcfg.validate();

    MetricsReport rep;
    std::shared_ptr<const PropagationStack> stack;
    if (cache != nullptr) {
        const std::size_t hits_before = cache->hits();
        stack = cache->get_or_compute(data.graph, data.features, cfg.propagation);
        rep.cache_hit = cache->hits() > hits_before;
    } else {
        stack = std::make_shared<const PropagationStack>(precompute_bundle(data.graph, data.features, cfg.propagation));
    }
    const ModelInputs inputs = prepare_inputs(data.graph, data.features, *stack, mcfg);

    rep.per_split.resize(splits.size());
    rep.params.resize(splits.size());
    parallel_for(splits.size(), threads, [&](std::size_t s) {
        TrainConfig tcfg = cfg.train;
        tcfg.seed = cfg.train.seed + s;
        const TrainResult tr = train(mcfg, tcfg, inputs, data.labels, splits[s].train, splits[s].val);
        SplitResult& r = rep.per_split[s];
        r.split = s;
        r.split_seed = splits[s].seed;
        r.best_epoch = tr.best_epoch;
        r.val_acc = tr.best_val_acc;
        r.test_acc = evaluate(tr.params, mcfg, inputs, data.labels, splits[s].test);
        rep.params[s] = tr.params;
    });

    std::vector<double> test, val;
    for (const auto& r : rep.per_split) {
        test.push_back(r.test_acc);
        val.push_back(r.val_acc);
    }
    rep.mean_test = mean_of(test);
    rep.std_test = population_std(test);
    rep.mean_val = mean_of(val);
    rep.config_echo = cfg.to_json();
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

std::vector<DepthRow> depth_sweep(const DatasetBundle& data, const ExperimentConfig& base,
                                  const std::vector<std::uint32_t>& K_list, const std::vector<SplitSpec>& splits,
                                  std::size_t threads) {
    if (K_list.empty()) throw InputError("depth_sweep needs a nonempty K list");
    std::vector<DepthRow> rows;
    for (std::uint32_t K : K_list) {
        ExperimentConfig cfg = base;
        cfg.propagation.K = K;
        cfg.model.K = K;
        const MetricsReport main = run_experiment(data, cfg, splits, nullptr, threads);
        cfg.propagation.variant = PropagationVariant::sgc;
        const MetricsReport sgc = run_experiment(data, cfg, splits, nullptr, threads);
        rows.push_back({K, main.mean_test, main.std_test, sgc.mean_test, sgc.std_test});
    }
    return rows;
}

std::vector<SearchSample> sample_search_space(const SearchSpace& space, std::size_t budget, std::uint64_t seed) {
    if (budget < 1) throw InputError("search budget must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) {
        return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)));
    };
    auto choice = [&](const auto& options) {
        std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
        return options[pick(rng)];
    };
    std::vector<SearchSample> out(budget);
    for (auto& s : out) {
        s.lr = log_uniform(space.lr_min, space.lr_max);
        s.weight_decay = log_uniform(space.weight_decay_min, space.weight_decay_max);
        s.dropout = choice(space.dropout);
        s.beta = choice(space.beta);
        s.gamma = choice(space.gamma);
        s.sim_kind = choice(space.sim_kind);
    }
    return out;
}

ExperimentConfig apply_sample(const ExperimentConfig& base, const SearchSample& s) {
    ExperimentConfig cfg = base;
    cfg.train.lr = s.lr;
    cfg.train.weight_decay = s.weight_decay;
    cfg.model.dropout = s.dropout;
    cfg.propagation.beta = s.beta;
    cfg.propagation.gamma = s.gamma;
    cfg.model.sim_kind = s.sim_kind;
    return cfg;
}

SearchResult random_search(const DatasetBundle& data, const ExperimentConfig& base, const SearchSpace& space,
                           std::size_t budget, const std::vector<SplitSpec>& splits, std::uint64_t seed,
                           std::size_t threads) {
    const auto samples = sample_search_space(space, budget, seed);
    SearchResult result;
    result.trials.resize(budget);
    std::vector<MetricsReport> reports(budget);
    PropagationCache cache;
    parallel_for(budget, threads, [&](std::size_t i) {
        SearchTrial& t = result.trials[i];
        t.sample = samples[i];
        try {
            reports[i] = run_experiment(data, apply_sample(base, samples[i]), splits, &cache, 1);
            t.mean_val = reports[i].mean_val;
            t.mean_test = reports[i].mean_test;
        } catch (const TrainingError& e) {
            t.failed = true;
            t.failure = e.what();
        }
    });
    bool found = false;
    for (std::size_t i = 0; i < budget; ++i) {
        if (result.trials[i].failed) continue;
        if (!found || result.trials[i].mean_val > result.trials[result.best].mean_val) {
            result.best = i;
            found = true;
        }
    }
    if (!found) throw TrainingError("every random-search trial diverged");
    result.best_config = apply_sample(base, samples[result.best]);
    result.best_report = std::move(reports[result.best]);
    result.cache_hits = cache.hits();
    return result;
}

} // namespace lsgnn
