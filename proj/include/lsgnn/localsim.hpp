#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "lsgnn/graph.hpp"
#include "lsgnn/matrix.hpp"

namespace lsgnn {

enum class SimilarityKind {
    cosine,         // x.y / (|x| |y|), 0 if either vector is zero
    euclidean,      // -|x - y|_2
    neg_sq_scalar,  // -(x - y)^2, one-dimensional features only
};

std::string_view to_string(SimilarityKind k) noexcept;
SimilarityKind parse_similarity(std::string_view s);

double similarity(std::span<const double> x, std::span<const double> y, SimilarityKind kind);

/// (d, d^2) for every directed CSR entry, aligned with g.col_indices().
struct EdgeSimFeatures {
    std::vector<double> d;
    std::vector<double> d_sq;

    std::size_t size() const noexcept { return d.size(); }
};

EdgeSimFeatures edge_sim_features(const SparseGraph& g, const Matrix& x, SimilarityKind kind);

// Per-node mean of a per-entry quantity over the node's CSR row. Isolated nodes get 0.
std::vector<double> neighborhood_mean(const SparseGraph& g, std::span<const double> per_entry);

// phi_i = mean_j sim(x_i, x_j)
std::vector<double> naive_localsim(const SparseGraph& g, const Matrix& x, SimilarityKind kind);

} // namespace lsgnn
