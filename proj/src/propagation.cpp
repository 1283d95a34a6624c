#include "lsgnn/propagation.hpp"

#include <cmath>

#include "lsgnn/error.hpp"
#include "lsgnn/kernels.hpp"

namespace lsgnn {

std::string_view to_string(PropagationVariant v) noexcept {
    switch (v) {
    case PropagationVariant::irdc: return "irdc";
    case PropagationVariant::sgc: return "sgc";
    case PropagationVariant::initial_residual: return "initial_residual";
    case PropagationVariant::difference_residual: return "difference_residual";
    }
    return "unknown";
}

PropagationVariant parse_variant(std::string_view s) {
    if (s == "irdc") return PropagationVariant::irdc;
    if (s == "sgc") return PropagationVariant::sgc;
    if (s == "initial_residual") return PropagationVariant::initial_residual;
    if (s == "difference_residual") return PropagationVariant::difference_residual;
    throw InputError("unknown propagation variant '" + std::string(s) + "'");
}

void PropagationConfig::validate() const {
    if (K < 1) throw InputError("propagation K must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("gamma must lie in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw InputError("beta must lie in [0, 1]");
    if (static_cast<std::uint8_t>(variant) > 3) throw InputError("unknown propagation variant");
}

std::vector<Matrix> irdc(const SparseMatrix& s, const Matrix& x, std::uint32_t k, double gamma) {
    if (k < 1) throw InputError("irdc needs at least one layer");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("gamma must lie in [0, 1]");
    const auto& kt = kernels::active();
    std::vector<Matrix> layers;
    layers.reserve(k);
    layers.push_back(spmm(s, x));
    Matrix processed = layers.back();  // sum of every layer so far
    for (std::uint32_t layer = 2; layer <= k; ++layer) {
        Matrix input = processed;
        kt.axpby(input.size(), 1.0 - gamma, x.data(), -gamma, input.data());
        layers.push_back(spmm(s, input));
        kt.axpy(processed.size(), 1.0, layers.back().data(), processed.data());
    }
    return layers;
}

std::vector<Matrix> residual_propagate(PropagationVariant variant, const SparseMatrix& s,
                                       const Matrix& x, std::uint32_t k) {
    if (k < 1) throw InputError("propagation needs at least one layer");
    const auto& kt = kernels::active();
    std::vector<Matrix> z;
    z.reserve(k);
    switch (variant) {
    case PropagationVariant::sgc:
        z.push_back(spmm(s, x));
        for (std::uint32_t i = 1; i < k; ++i) z.push_back(spmm(s, z.back()));
        break;
    case PropagationVariant::initial_residual:
        for (std::uint32_t i = 0; i < k; ++i) {
            Matrix next = spmm(s, i == 0 ? x : z.back());
            kt.axpy(next.size(), 1.0, x.data(), next.data());
            z.push_back(std::move(next));
        }
        break;
    case PropagationVariant::difference_residual:
        z.push_back(spmm(s, x));
        for (std::uint32_t i = 1; i < k; ++i) {
            Matrix diff = i == 1 ? x : z[i - 2];
            kt.axpy(diff.size(), -1.0, z[i - 1].data(), diff.data());
            z.push_back(spmm(s, diff));
        }
        break;
    default:
        throw InputError("residual_propagate: unsupported variant '" + std::string(to_string(variant)) + "'");
    }
    return z;
}

std::vector<Matrix> propagate(PropagationVariant variant, const SparseMatrix& s, const Matrix& x,
                              std::uint32_t k, double gamma) {
    if (variant == PropagationVariant::irdc) return irdc(s, x, k, gamma);
    return residual_propagate(variant, s, x, k);
}

Matrix row_normalize(const Matrix& m) {
    Matrix out = m;
    const auto& kt = kernels::active();
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        double sq = 0.0;
        for (double v : r) sq += v * v;
        if (sq > 0.0) kt.scale(r.size(), 1.0 / std::sqrt(sq), r.data());
    }
    return out;
}

PropagationStack precompute_bundle(const SparseGraph& g, const Matrix& x, const PropagationConfig& cfg) {
    cfg.validate();
    if (x.rows() != g.num_nodes()) {
        throw InputError("feature rows (" + std::to_string(x.rows()) + ") != graph nodes (" +
                         std::to_string(g.num_nodes()) + ")");
    }
    return precompute_with_filters(enhanced_filters(g, cfg.beta), x, cfg);
}

PropagationStack precompute_with_filters(const FilterPair& filters, const Matrix& x,
                                         const PropagationConfig& cfg) {
    cfg.validate();
    PropagationStack stack;
    stack.config = cfg;
    stack.feature_digest = feature_digest(x);
    stack.low_layers = propagate(cfg.variant, filters.low, x, cfg.K, cfg.gamma);
    stack.high_layers = propagate(cfg.variant, filters.high, x, cfg.K, cfg.gamma);
    if (cfg.normalize) {
        for (auto& m : stack.low_layers) m = row_normalize(m);
        for (auto& m : stack.high_layers) m = row_normalize(m);
    }
    return stack;
}

} // namespace lsgnn
