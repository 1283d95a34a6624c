#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsgnn/graph.hpp"
#include "lsgnn/localsim.hpp"
#include "lsgnn/matrix.hpp"
#include "lsgnn/propagation.hpp"

namespace lsgnn {

enum class WeightMode { node_level, graph_level };
enum class LocalSimMode { naive, refined };

std::string_view to_string(WeightMode m) noexcept;
std::string_view to_string(LocalSimMode m) noexcept;
WeightMode parse_weight_mode(std::string_view s);
LocalSimMode parse_localsim_mode(std::string_view s);

struct ModelConfig {
    std::uint32_t K = 5;
    std::size_t d = 1;        // input feature width
    std::size_t z = 64;       // hidden width of every channel
    std::size_t C = 2;        // classes
    std::size_t h_ls = 16;    // hidden width of the per-edge similarity perceptron
    std::size_t h_alpha = 16; // hidden width of the fusion-weight perceptron
    SimilarityKind sim_kind = SimilarityKind::cosine;
    double dropout = 0.5;
    WeightMode weight_mode = WeightMode::node_level;
    LocalSimMode localsim_mode = LocalSimMode::refined;

    void validate() const;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// affine -> ReLU -> affine. Weights are (in x hidden) and (hidden x out),
/// biases are single-row matrices.
struct Perceptron {
    Matrix w1, b1, w2, b2;
};

struct ModelParameters {
    Matrix w_identity;            // d x z
    std::vector<Matrix> w_low;    // K of d x z
    std::vector<Matrix> w_high;   // K of d x z
    Perceptron mlp_ls;            // 2 -> h_ls -> 1
    Perceptron mlp_alpha;         // 2 -> h_alpha -> 3K
    Matrix w_out;                 // (K+1) z x C
    Matrix graph_alpha;           // 1 x 3K, graph_level mode only

    static ModelParameters zeros(const ModelConfig& cfg);
    // Every entry ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) with fan_in the
    // input width of the layer it feeds.
    static ModelParameters init_uniform(const ModelConfig& cfg, std::mt19937_64& rng);

    // Fixed order; used by the optimizer, checkpoints and gradient checks.
    std::vector<Matrix*> tensors();
    std::vector<const Matrix*> tensors() const;
    static std::vector<std::string> tensor_names(const ModelConfig& cfg);

    std::size_t num_scalars() const;
    double squared_norm() const;
    bool shapes_match(const ModelConfig& cfg) const;

    friend bool operator==(const ModelParameters& a, const ModelParameters& b);
};

/// Per-node fusion weights, each n x K.
struct FusionWeights {
    Matrix alpha_identity, alpha_low, alpha_high;
};

/// Parameter-free inputs of one graph, computed once and reused every epoch.
struct ModelInputs {
    const SparseGraph* graph = nullptr;
    const Matrix* features = nullptr;
    const PropagationStack* stack = nullptr;
    EdgeSimFeatures edge_features;
    std::vector<double> naive_phi;

    std::size_t num_nodes() const noexcept { return features ? features->rows() : 0; }
};

// The referenced objects must outlive the returned inputs.
ModelInputs prepare_inputs(const SparseGraph& g, const Matrix& x, const PropagationStack& stack,
                           const ModelConfig& cfg);

using Labels = std::vector<std::int32_t>;
using Mask = std::vector<std::uint8_t>;

// phi_i = mean_j MLP_ls([d_ij, d_ij^2]); isolated nodes get 0.
std::vector<double> refined_localsim(const Perceptron& mlp_ls, const EdgeSimFeatures& edge_feats,
                                     const SparseGraph& g);

// [alpha_I | alpha_L | alpha_H] = MLP_alpha([phi, phi^2]), unnormalized.
FusionWeights fusion_weights(const Perceptron& mlp_alpha, std::span<const double> phi, std::uint32_t K);

struct ForwardCache;

struct ForwardResult {
    Matrix probs;    // n x C, rows sum to 1
    Matrix logits;   // n x C
    std::vector<double> phi;
    FusionWeights alpha;
};

// Deterministic inference pass (no dropout).
ForwardResult forward(const ModelParameters& params, const ModelConfig& cfg, const ModelInputs& inputs);
// Training pass: dropout is drawn from `rng` when cfg.dropout > 0.
ForwardResult forward(const ModelParameters& params, const ModelConfig& cfg, const ModelInputs& inputs,
                      bool training, std::mt19937_64* rng);

struct LossAndGradients {
    double loss = 0.0;
    double data_loss = 0.0;  // cross-entropy part
    ModelParameters grads;
};

// Mean softmax cross-entropy over masked nodes plus weight_decay * |params|^2 / 2,
// with exact gradients of every parameter. Dropout is active iff rng != nullptr.
LossAndGradients loss_and_gradients(const ModelParameters& params, const ModelConfig& cfg,
                                    const ModelInputs& inputs, const Labels& labels, const Mask& mask,
                                    double weight_decay, std::mt19937_64* rng = nullptr);

Matrix softmax_rows(const Matrix& logits);

// Argmax accuracy over masked nodes; ties go to the lowest class index.
double accuracy(const Matrix& probs, const Labels& labels, const Mask& mask);
double evaluate(const ModelParameters& params, const ModelConfig& cfg, const ModelInputs& inputs,
                const Labels& labels, const Mask& mask);

struct TrainConfig {
    double lr = 0.01;
    double weight_decay = 5e-4;
    std::uint32_t epochs = 200;
    std::uint32_t patience = 40;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    std::uint32_t epoch = 0;
    double train_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainResult {
    ModelParameters params;        // best-validation snapshot
    std::vector<EpochRecord> history;
    std::uint32_t best_epoch = 0;
    double best_val_acc = 0.0;
};

// Full-batch Adam. Validation accuracy is tracked every epoch; training stops
// once `patience` epochs pass without strict improvement.
TrainResult train(const ModelConfig& cfg, const TrainConfig& tcfg, const ModelInputs& inputs,
                  const Labels& labels, const Mask& train_mask, const Mask& val_mask);

// Binary checkpoint ("LSPM").
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const ModelConfig& cfg, const ModelParameters& params, const std::filesystem::path& path);
std::pair<ModelConfig, ModelParameters> load_checkpoint(const std::filesystem::path& path);

} // namespace lsgnn
