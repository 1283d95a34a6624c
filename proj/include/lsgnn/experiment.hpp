#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "lsgnn/dataset.hpp"
#include "lsgnn/model.hpp"
#include "lsgnn/propagation.hpp"

namespace lsgnn {

/// Everything needed to reproduce one training run besides the data itself.
/// d and C are taken from the dataset at run time.
struct ExperimentConfig {
    ModelConfig model;
    PropagationConfig propagation;
    TrainConfig train;
    std::size_t num_splits = 10;
    std::size_t budget = 200;                 // random search trials
    std::vector<std::uint32_t> K_list{1, 2, 4, 8};

    // Flat JSON object; keys are the field names above (model, propagation
    // and train fields are addressed directly, e.g. "lr", "K", "sim_kind").
    // Unknown keys, wrong types and out-of-domain values are InputErrors.
    void apply_json(const std::string& text);
    static ExperimentConfig from_file(const std::filesystem::path& path);
    std::string to_json() const;  // canonical, key-sorted
};

/// Thread-safe, write-once cache of propagation stacks keyed by
/// (graph digest, feature digest, propagation config).
class PropagationCache {
public:
    std::shared_ptr<const PropagationStack> get_or_compute(const SparseGraph& g, const Matrix& x,
                                                           const PropagationConfig& cfg);
    // Registers a stack computed elsewhere (e.g. loaded from a bundle file).
    // The features must match the stack's digest.
    void insert(const SparseGraph& g, const Matrix& x, PropagationStack stack);
    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }

private:
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<const PropagationStack>> entries_;
    std::atomic<std::size_t> hits_{0}, misses_{0};
};

struct SplitResult {
    std::size_t split = 0;
    std::uint64_t split_seed = 0;
    std::uint32_t best_epoch = 0;
    double val_acc = 0.0;
    double test_acc = 0.0;
};

struct MetricsReport {
    std::vector<SplitResult> per_split;
    double mean_test = 0.0;
    double std_test = 0.0;  // population standard deviation over splits
    double mean_val = 0.0;
    double seconds = 0.0;   // wall clock, excluded from report files
    bool cache_hit = false;
    std::string config_echo;
    std::vector<ModelParameters> params;  // best-validation parameters per split
};

// Propagates once (through the cache when given), then trains and evaluates
// one model per split. Split s trains with seed cfg.train.seed + s.
MetricsReport run_experiment(const DatasetBundle& data, const ExperimentConfig& cfg,
                             const std::vector<SplitSpec>& splits, PropagationCache* cache = nullptr,
                             std::size_t threads = 1);

struct DepthRow {
    std::uint32_t K = 0;
    double lsgnn_mean = 0.0, lsgnn_std = 0.0;
    double sgc_mean = 0.0, sgc_std = 0.0;
};

// One run per K with the configured variant, plus the same head fed by the
// sgc recurrence, on shared splits.
std::vector<DepthRow> depth_sweep(const DatasetBundle& data, const ExperimentConfig& base,
                                  const std::vector<std::uint32_t>& K_list, const std::vector<SplitSpec>& splits,
                                  std::size_t threads = 1);

/// Hyperparameter domains searched by random_search.
struct SearchSpace {
    double lr_min = 1e-3, lr_max = 1e-1;                    // log-uniform
    double weight_decay_min = 1e-6, weight_decay_max = 1e-1; // log-uniform
    std::vector<double> dropout{0.1, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> beta{0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    std::vector<double> gamma{0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    std::vector<SimilarityKind> sim_kind{SimilarityKind::cosine, SimilarityKind::euclidean};
};

struct SearchSample {
    double lr = 0.0, weight_decay = 0.0, dropout = 0.0, beta = 0.0, gamma = 0.0;
    SimilarityKind sim_kind = SimilarityKind::cosine;
};

// The i-th sample depends only on (seed, i), so shorter budgets see a prefix
// of the same sequence.
std::vector<SearchSample> sample_search_space(const SearchSpace& space, std::size_t budget, std::uint64_t seed);
ExperimentConfig apply_sample(const ExperimentConfig& base, const SearchSample& s);

struct SearchTrial {
    SearchSample sample;
    bool failed = false;
    std::string failure;
    double mean_val = 0.0;
    double mean_test = 0.0;
};

struct SearchResult {
    std::vector<SearchTrial> trials;
    std::size_t best = 0;  // index into trials; first of equal validation scores
    ExperimentConfig best_config;
    MetricsReport best_report;
    std::size_t cache_hits = 0;
};

SearchResult random_search(const DatasetBundle& data, const ExperimentConfig& base, const SearchSpace& space,
                           std::size_t budget, const std::vector<SplitSpec>& splits, std::uint64_t seed,
                           std::size_t threads = 1);

} // namespace lsgnn
