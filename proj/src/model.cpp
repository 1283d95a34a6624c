#include "lsgnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lsgnn/error.hpp"
#include "lsgnn/kernels.hpp"

namespace lsgnn {

std::string_view to_string(WeightMode m) noexcept {
    return m == WeightMode::node_level ? "node_level" : "graph_level";
}

std::string_view to_string(LocalSimMode m) noexcept { return m == LocalSimMode::naive ? "naive" : "refined"; }

WeightMode parse_weight_mode(std::string_view s) {
    if (s == "node_level") return WeightMode::node_level;
    if (s == "graph_level") return WeightMode::graph_level;
    throw InputError("unknown weight mode '" + std::string(s) + "'");
}

LocalSimMode parse_localsim_mode(std::string_view s) {
    if (s == "naive") return LocalSimMode::naive;
    if (s == "refined") return LocalSimMode::refined;
    throw InputError("unknown localsim mode '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
    if (K < 1) throw InputError("model K must be >= 1");
    if (d < 1 || z < 1 || C < 1 || h_ls < 1 || h_alpha < 1) throw InputError("model widths must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InputError("dropout must lie in [0, 1)");
    if (sim_kind == SimilarityKind::neg_sq_scalar && d != 1) {
        throw InputError("neg_sq_scalar similarity needs d = 1");
    }
}

// ---------------------------------------------------------------------------
// Parameters

ModelParameters ModelParameters::zeros(const ModelConfig& cfg) {
    cfg.validate();
    ModelParameters p;
    p.w_identity = Matrix(cfg.d, cfg.z);
    p.w_low.assign(cfg.K, Matrix(cfg.d, cfg.z));
    p.w_high.assign(cfg.K, Matrix(cfg.d, cfg.z));
    p.mlp_ls = {Matrix(2, cfg.h_ls), Matrix(1, cfg.h_ls), Matrix(cfg.h_ls, 1), Matrix(1, 1)};
    p.mlp_alpha = {Matrix(2, cfg.h_alpha), Matrix(1, cfg.h_alpha), Matrix(cfg.h_alpha, 3 * cfg.K),
                   Matrix(1, 3 * cfg.K)};
    p.w_out = Matrix((cfg.K + 1) * cfg.z, cfg.C);
    p.graph_alpha = Matrix(1, 3 * cfg.K);
    return p;
}

namespace {

void fill_uniform(Matrix& m, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : m.values()) v = dist(rng);
}

double fan_in_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

} // namespace

ModelParameters ModelParameters::init_uniform(const ModelConfig& cfg, std::mt19937_64& rng) {
    ModelParameters p = zeros(cfg);
    fill_uniform(p.w_identity, fan_in_bound(cfg.d), rng);
    for (auto& w : p.w_low) fill_uniform(w, fan_in_bound(cfg.d), rng);
    for (auto& w : p.w_high) fill_uniform(w, fan_in_bound(cfg.d), rng);
    for (Perceptron* mlp : {&p.mlp_ls, &p.mlp_alpha}) {
        fill_uniform(mlp->w1, fan_in_bound(2), rng);
        fill_uniform(mlp->b1, fan_in_bound(2), rng);
        fill_uniform(mlp->w2, fan_in_bound(mlp->w2.rows()), rng);
        fill_uniform(mlp->b2, fan_in_bound(mlp->w2.rows()), rng);
    }
    fill_uniform(p.w_out, fan_in_bound(p.w_out.rows()), rng);
    fill_uniform(p.graph_alpha, fan_in_bound(2), rng);
    return p;
}

std::vector<Matrix*> ModelParameters::tensors() {
    std::vector<Matrix*> out{&w_identity};
    for (auto& w : w_low) out.push_back(&w);
    for (auto& w : w_high) out.push_back(&w);
    for (Perceptron* mlp : {&mlp_ls, &mlp_alpha}) {
        out.insert(out.end(), {&mlp->w1, &mlp->b1, &mlp->w2, &mlp->b2});
    }
    out.push_back(&w_out);
    out.push_back(&graph_alpha);
    return out;
}

std::vector<const Matrix*> ModelParameters::tensors() const {
    auto mut = const_cast<ModelParameters*>(this)->tensors();
    return {mut.begin(), mut.end()};
}

std::vector<std::string> ModelParameters::tensor_names(const ModelConfig& cfg) {
    std::vector<std::string> names{"w_identity"};
    for (std::uint32_t k = 0; k < cfg.K; ++k) names.push_back("w_low[" + std::to_string(k) + "]");
    for (std::uint32_t k = 0; k < cfg.K; ++k) names.push_back("w_high[" + std::to_string(k) + "]");
    for (const char* mlp : {"mlp_ls", "mlp_alpha"}) {
        for (const char* part : {".w1", ".b1", ".w2", ".b2"}) names.push_back(std::string(mlp) + part);
    }
    names.push_back("w_out");
    names.push_back("graph_alpha");
    return names;
}

std::size_t ModelParameters::num_scalars() const {
    std::size_t n = 0;
    for (const Matrix* t : tensors()) n += t->size();
    return n;
}

double ModelParameters::squared_norm() const {
    double s = 0.0;
    for (const Matrix* t : tensors())
        for (double v : t->values()) s += v * v;
    return s;
}

bool ModelParameters::shapes_match(const ModelConfig& cfg) const {
    const ModelParameters ref = zeros(cfg);
    const auto mine = tensors();
    const auto theirs = ref.tensors();
    if (mine.size() != theirs.size()) return false;
    for (std::size_t i = 0; i < mine.size(); ++i) {
        if (mine[i]->rows() != theirs[i]->rows() || mine[i]->cols() != theirs[i]->cols()) return false;
    }
    return true;
}

bool operator==(const ModelParameters& a, const ModelParameters& b) {
    const auto ta = a.tensors();
    const auto tb = b.tensors();
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i)
        if (!(*ta[i] == *tb[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Building blocks

namespace {

void relu_inplace(Matrix& m) {
    for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
}

// out = in * w + b (b broadcast over rows)
Matrix affine(const Matrix& in, const Matrix& w, const Matrix& b) {
    Matrix out = matmul(in, w);
    for (std::size_t i = 0; i < out.rows(); ++i) kernels::active().axpy(out.cols(), 1.0, b.data(), out.row(i).data());
    return out;
}

Matrix column_sums(const Matrix& m) {
    Matrix s(1, m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) kernels::active().axpy(m.cols(), 1.0, m.row(i).data(), s.data());
    return s;
}

// Forward state of a perceptron evaluated on a batch of inputs.
struct PerceptronPass {
    Matrix input;   // rows x in
    Matrix hidden;  // rows x hidden, post-ReLU
    Matrix output;  // rows x out
};

PerceptronPass run_perceptron(const Perceptron& mlp, Matrix input) {
    PerceptronPass pass;
    pass.input = std::move(input);
    pass.hidden = affine(pass.input, mlp.w1, mlp.b1);
    relu_inplace(pass.hidden);
    pass.output = affine(pass.hidden, mlp.w2, mlp.b2);
    return pass;
}

// Accumulates parameter gradients into `grad` and returns d(loss)/d(input).
Matrix backprop_perceptron(const Perceptron& mlp, const PerceptronPass& pass, const Matrix& d_output,
                           Perceptron& grad) {
    grad.w2 = matmul_at_b(pass.hidden, d_output);
    grad.b2 = column_sums(d_output);
    Matrix d_hidden = matmul_a_bt(d_output, mlp.w2);
    for (std::size_t i = 0; i < d_hidden.size(); ++i) {
        if (!(pass.hidden.data()[i] > 0.0)) d_hidden.data()[i] = 0.0;
    }
    grad.w1 = matmul_at_b(pass.input, d_hidden);
    grad.b1 = column_sums(d_hidden);
    return matmul_a_bt(d_hidden, mlp.w1);
}

Matrix edge_input(const EdgeSimFeatures& f) {
    Matrix in(f.size(), 2);
    for (std::size_t e = 0; e < f.size(); ++e) {
        in(e, 0) = f.d[e];
        in(e, 1) = f.d_sq[e];
    }
    return in;
}

Matrix phi_input(std::span<const double> phi) {
    Matrix in(phi.size(), 2);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        in(i, 0) = phi[i];
        in(i, 1) = phi[i] * phi[i];
    }
    return in;
}

FusionWeights split_alpha(const Matrix& raw, std::uint32_t K) {
    const std::size_t n = raw.rows();
    FusionWeights w{Matrix(n, K), Matrix(n, K), Matrix(n, K)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t k = 0; k < K; ++k) {
            w.alpha_identity(i, k) = raw(i, k);
            w.alpha_low(i, k) = raw(i, K + k);
            w.alpha_high(i, k) = raw(i, 2 * K + k);
        }
    }
    return w;
}

// Inverted dropout; returns the multiplier applied to each entry.
Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    std::bernoulli_distribution keep(1.0 - rate);
    const double scale = 1.0 / (1.0 - rate);
    for (double& v : m.values()) v = keep(rng) ? scale : 0.0;
    return m;
}

void multiply_inplace(Matrix& a, const Matrix& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] *= b.data()[i];
}

void check_inputs(const ModelParameters& params, const ModelConfig& cfg, const ModelInputs& in) {
    cfg.validate();
    if (in.graph == nullptr || in.features == nullptr || in.stack == nullptr) {
        throw InputError("model inputs are incomplete");
    }
    if (in.stack->config.K != cfg.K || in.stack->low_layers.size() != cfg.K) {
        throw InputError("propagation stack has K=" + std::to_string(in.stack->config.K) +
                         " but model expects K=" + std::to_string(cfg.K));
    }
    if (in.features->cols() != cfg.d || in.stack->feature_dim() != cfg.d) {
        throw InputError("feature width does not match model d=" + std::to_string(cfg.d));
    }
    if (in.features->rows() != in.graph->num_nodes() || in.stack->num_nodes() != in.graph->num_nodes()) {
        throw InputError("feature/stack rows do not match graph node count");
    }
    if (!params.shapes_match(cfg)) throw InputError("parameter shapes do not match model config");
}

} // namespace

std::vector<double> refined_localsim(const Perceptron& mlp_ls, const EdgeSimFeatures& edge_feats,
                                     const SparseGraph& g) {
    if (edge_feats.size() != g.num_entries()) throw InputError("edge features do not match graph");
    const PerceptronPass pass = run_perceptron(mlp_ls, edge_input(edge_feats));
    return neighborhood_mean(g, pass.output.values());
}

FusionWeights fusion_weights(const Perceptron& mlp_alpha, std::span<const double> phi, std::uint32_t K) {
    if (mlp_alpha.w2.cols() != 3 * static_cast<std::size_t>(K)) {
        throw InputError("fusion perceptron output width must be 3K");
    }
    return split_alpha(run_perceptron(mlp_alpha, phi_input(phi)).output, K);
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const auto in = logits.row(i);
        auto out = p.row(i);
        const double mx = *std::max_element(in.begin(), in.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            out[c] = std::exp(in[c] - mx);
            sum += out[c];
        }
        for (double& v : out) v /= sum;
    }
    return p;
}

ModelInputs prepare_inputs(const SparseGraph& g, const Matrix& x, const PropagationStack& stack,
                           const ModelConfig& cfg) {
    ModelInputs in;
    in.graph = &g;
    in.features = &x;
    in.stack = &stack;
    if (cfg.weight_mode == WeightMode::node_level) {
        in.edge_features = edge_sim_features(g, x, cfg.sim_kind);
        in.naive_phi = neighborhood_mean(g, in.edge_features.d);
    }
    return in;
}

// ---------------------------------------------------------------------------
// Forward / backward

struct ForwardCache {
    std::size_t n = 0;
    Matrix h_identity;                 // post-ReLU, post-dropout
    std::vector<Matrix> h_low, h_high;
    Matrix drop_identity;              // dropout multipliers (empty when inactive)
    std::vector<Matrix> drop_low, drop_high;
    PerceptronPass ls_pass;            // refined mode only
    PerceptronPass alpha_pass;         // node-level mode only
    std::vector<double> phi;
    FusionWeights alpha;
    Matrix fused;                      // n x (K+1) z
    Matrix logits;
    Matrix probs;
};

namespace {

void run_forward(const ModelParameters& params, const ModelConfig& cfg, const ModelInputs& in, bool training,
                 std::mt19937_64* rng, ForwardCache& c) {
    check_inputs(params, cfg, in);
    const std::size_t n = in.num_nodes();
    const std::size_t z = cfg.z;
    const std::uint32_t K = cfg.K;
    const bool drop = training && cfg.dropout > 0.0 && rng != nullptr;
    c.n = n;

    auto transform = [&](const Matrix& src, const Matrix& w, Matrix& h, Matrix& mask) {
        h = matmul(src, w);
        relu_inplace(h);
        if (drop) {
            mask = dropout_mask(n, z, cfg.dropout, *rng);
            multiply_inplace(h, mask);
        }
    };
    transform(*in.features, params.w_identity, c.h_identity, c.drop_identity);
    c.h_low.resize(K);
    c.h_high.resize(K);
    c.drop_low.resize(K);
    c.drop_high.resize(K);
    for (std::uint32_t k = 0; k < K; ++k) {
        transform(in.stack->low_layers[k], params.w_low[k], c.h_low[k], c.drop_low[k]);
        transform(in.stack->high_layers[k], params.w_high[k], c.h_high[k], c.drop_high[k]);
    }

    if (cfg.weight_mode == WeightMode::graph_level) {
        Matrix raw(n, 3 * K);
        for (std::size_t i = 0; i < n; ++i) std::copy_n(params.graph_alpha.data(), 3 * K, raw.row(i).data());
        c.alpha = split_alpha(raw, K);
        c.phi.clear();
    } else {
        if (cfg.localsim_mode == LocalSimMode::refined) {
            if (in.edge_features.size() != in.graph->num_entries()) {
                throw InputError("model inputs lack edge similarity features");
            }
            c.ls_pass = run_perceptron(params.mlp_ls, edge_input(in.edge_features));
            c.phi = neighborhood_mean(*in.graph, c.ls_pass.output.values());
        } else {
            if (in.naive_phi.size() != n) throw InputError("model inputs lack naive LocalSim values");
            c.phi = in.naive_phi;
        }
        c.alpha_pass = run_perceptron(params.mlp_alpha, phi_input(c.phi));
        c.alpha = split_alpha(c.alpha_pass.output, K);
    }

    c.fused = Matrix(n, (K + 1) * z);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = c.fused.row(i);
        const auto hi = c.h_identity.row(i);
        std::copy(hi.begin(), hi.end(), row.begin());
        for (std::uint32_t k = 0; k < K; ++k) {
            const double ai = c.alpha.alpha_identity(i, k);
            const double al = c.alpha.alpha_low(i, k);
            const double ah = c.alpha.alpha_high(i, k);
            const auto hl = c.h_low[k].row(i);
            const auto hh = c.h_high[k].row(i);
            double* zk = row.data() + (k + 1) * z;
            for (std::size_t j = 0; j < z; ++j) zk[j] = ai * hi[j] + al * hl[j] + ah * hh[j];
        }
    }
    c.logits = matmul(c.fused, params.w_out);
    c.probs = softmax_rows(c.logits);
}

} // namespace

ForwardResult forward(const ModelParameters& params, const ModelConfig& cfg, const ModelInputs& inputs) {
    return forward(params, cfg, inputs, false, nullptr);
}

ForwardResult forward(const ModelParameters& params, const ModelConfig& cfg, const ModelInputs& inputs,
                      bool training, std::mt19937_64* rng) {
    ForwardCache c;
    run_forward(params, cfg, inputs, training, rng, c);
    return {std::move(c.probs), std::move(c.logits), std::move(c.phi), std::move(c.alpha)};
}

LossAndGradients loss_and_gradients(const ModelParameters& params, const ModelConfig& cfg,
                                    const ModelInputs& inputs, const Labels& labels, const Mask& mask,
                                    double weight_decay, std::mt19937_64* rng) {
    ForwardCache c;
    run_forward(params, cfg, inputs, rng != nullptr, rng, c);
    const std::size_t n = c.n;
    const std::size_t z = cfg.z;
    const std::size_t C = cfg.C;
    const std::uint32_t K = cfg.K;
    if (labels.size() != n || mask.size() != n) throw InputError("labels/mask length must equal node count");

    LossAndGradients out;
    out.grads = ModelParameters::zeros(cfg);
    ModelParameters& g = out.grads;

    std::size_t m = 0;
    for (auto v : mask) m += v ? 1 : 0;

    // Cross-entropy and d(loss)/d(logits).
    Matrix d_logits(n, C);
    if (m > 0) {
        const double inv_m = 1.0 / static_cast<double>(m);
        double ce = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask[i]) continue;
            const auto y = static_cast<std::size_t>(labels[i]);
            if (labels[i] < 0 || y >= C) throw InputError("label out of range at node " + std::to_string(i));
            const auto lg = c.logits.row(i);
            const double mx = *std::max_element(lg.begin(), lg.end());
            double sum = 0.0;
            for (double v : lg) sum += std::exp(v - mx);
            ce -= lg[y] - mx - std::log(sum);
            for (std::size_t k = 0; k < C; ++k) d_logits(i, k) = (c.probs(i, k) - (k == y ? 1.0 : 0.0)) * inv_m;
        }
        out.data_loss = ce * inv_m;
    }

    g.w_out = matmul_at_b(c.fused, d_logits);
    const Matrix d_fused = matmul_a_bt(d_logits, params.w_out);

    // Split the fused gradient into channel gradients and fusion-weight gradients.
    Matrix d_identity(n, z);
    std::vector<Matrix> d_low(K, Matrix(n, z)), d_high(K, Matrix(n, z));
    Matrix d_alpha(n, 3 * K);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = d_fused.row(i);
        auto di = d_identity.row(i);
        std::copy_n(row.data(), z, di.data());
        const auto hi = c.h_identity.row(i);
        for (std::uint32_t k = 0; k < K; ++k) {
            const double* dz = row.data() + (k + 1) * z;
            const auto hl = c.h_low[k].row(i);
            const auto hh = c.h_high[k].row(i);
            double gi = 0.0, gl = 0.0, gh = 0.0;
            for (std::size_t j = 0; j < z; ++j) {
                gi += dz[j] * hi[j];
                gl += dz[j] * hl[j];
                gh += dz[j] * hh[j];
            }
            d_alpha(i, k) = gi;
            d_alpha(i, K + k) = gl;
            d_alpha(i, 2 * K + k) = gh;
            const double ai = c.alpha.alpha_identity(i, k);
            const double al = c.alpha.alpha_low(i, k);
            const double ah = c.alpha.alpha_high(i, k);
            auto dl = d_low[k].row(i);
            auto dh = d_high[k].row(i);
            for (std::size_t j = 0; j < z; ++j) {
                di[j] += ai * dz[j];
                dl[j] = al * dz[j];
                dh[j] = ah * dz[j];
            }
        }
    }

    // Through dropout and ReLU into the channel weights. The cached h is
    // post-dropout, so h > 0 exactly where the unit was active and kept.
    auto channel_backward = [&](const Matrix& src, const Matrix& h, const Matrix& drop, Matrix& d, Matrix& gw) {
        for (std::size_t idx = 0; idx < d.size(); ++idx) {
            if (h.data()[idx] > 0.0) {
                if (!drop.empty()) d.data()[idx] *= drop.data()[idx];
            } else {
                d.data()[idx] = 0.0;
            }
        }
        gw = matmul_at_b(src, d);
    };
    channel_backward(*inputs.features, c.h_identity, c.drop_identity, d_identity, g.w_identity);
    for (std::uint32_t k = 0; k < K; ++k) {
        channel_backward(inputs.stack->low_layers[k], c.h_low[k], c.drop_low[k], d_low[k], g.w_low[k]);
        channel_backward(inputs.stack->high_layers[k], c.h_high[k], c.drop_high[k], d_high[k], g.w_high[k]);
    }

    if (cfg.weight_mode == WeightMode::graph_level) {
        g.graph_alpha = column_sums(d_alpha);
    } else {
        const Matrix d_phi_in = backprop_perceptron(params.mlp_alpha, c.alpha_pass, d_alpha, g.mlp_alpha);
        if (cfg.localsim_mode == LocalSimMode::refined) {
            const SparseGraph& graph = *inputs.graph;
            Matrix d_edge(graph.num_entries(), 1);
            const auto offsets = graph.row_offsets();
            for (std::size_t i = 0; i < n; ++i) {
                if (graph.degree(i) == 0) continue;
                const double d_phi = d_phi_in(i, 0) + 2.0 * c.phi[i] * d_phi_in(i, 1);
                const double share = d_phi / graph.degree(i);
                for (EdgeOffset e = offsets[i]; e < offsets[i + 1]; ++e) d_edge(e, 0) = share;
            }
            backprop_perceptron(params.mlp_ls, c.ls_pass, d_edge, g.mlp_ls);
        }
    }

    // L2 penalty on every parameter.
    out.loss = out.data_loss;
    if (weight_decay != 0.0) {
        out.loss += 0.5 * weight_decay * params.squared_norm();
        const auto pt = params.tensors();
        const auto gt = g.tensors();
        for (std::size_t t = 0; t < pt.size(); ++t) {
            kernels::active().axpy(pt[t]->size(), weight_decay, pt[t]->data(), gt[t]->data());
        }
    }
    return out;
}

double accuracy(const Matrix& probs, const Labels& labels, const Mask& mask) {
    if (labels.size() != probs.rows() || mask.size() != probs.rows()) {
        throw InputError("accuracy: labels/mask length must equal row count");
    }
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        if (!mask[i]) continue;
        ++total;
        const auto row = probs.row(i);
        // max_element returns the first maximum, i.e. the lowest class index on ties.
        const auto best = static_cast<std::int32_t>(std::max_element(row.begin(), row.end()) - row.begin());
        correct += best == labels[i] ? 1 : 0;
    }
    if (total == 0) throw InputError("accuracy over an empty mask");
    return static_cast<double>(correct) / static_cast<double>(total);
}

double evaluate(const ModelParameters& params, const ModelConfig& cfg, const ModelInputs& inputs,
                const Labels& labels, const Mask& mask) {
    return accuracy(forward(params, cfg, inputs).probs, labels, mask);
}

} // namespace lsgnn
