#include "lsgnn/localsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsgnn/error.hpp"

namespace lsgnn {

std::string_view to_string(SimilarityKind k) noexcept {
    switch (k) {
    case SimilarityKind::cosine: return "cosine";
    case SimilarityKind::euclidean: return "euclidean";
    case SimilarityKind::neg_sq_scalar: return "neg_sq_scalar";
    }
    return "unknown";
}

SimilarityKind parse_similarity(std::string_view s) {
    if (s == "cosine") return SimilarityKind::cosine;
    if (s == "euclidean") return SimilarityKind::euclidean;
    if (s == "neg_sq_scalar") return SimilarityKind::neg_sq_scalar;
    throw InputError("unknown similarity kind '" + std::string(s) + "'");
}

double similarity(std::span<const double> x, std::span<const double> y, SimilarityKind kind) {
    if (x.size() != y.size()) {
        throw InputError("similarity dimension mismatch: " + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
    }
    switch (kind) {
    case SimilarityKind::cosine: {
        double dot = 0.0, xx = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            dot += x[i] * y[i];
            xx += x[i] * x[i];
            yy += y[i] * y[i];
        }
        if (xx == 0.0 || yy == 0.0) return 0.0;
        const double c = dot / (std::sqrt(xx) * std::sqrt(yy));
        return std::clamp(c, -1.0, 1.0);
    }
    case SimilarityKind::euclidean: {
        double sq = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = x[i] - y[i];
            sq += diff * diff;
        }
        return -std::sqrt(sq);
    }
    case SimilarityKind::neg_sq_scalar: {
        if (x.size() != 1) throw InputError("neg_sq_scalar similarity needs 1-dimensional features");
        const double diff = x[0] - y[0];
        return -(diff * diff);
    }
    }
    throw InputError("unknown similarity kind");
}

EdgeSimFeatures edge_sim_features(const SparseGraph& g, const Matrix& x, SimilarityKind kind) {
    if (x.rows() != g.num_nodes()) throw InputError("edge_sim_features: feature rows != graph nodes");
    if (kind == SimilarityKind::neg_sq_scalar && x.cols() != 1) {
        throw InputError("neg_sq_scalar similarity needs 1-dimensional features");
    }
    EdgeSimFeatures f;
    f.d.resize(g.num_entries());
    f.d_sq.resize(g.num_entries());
    const auto offsets = g.row_offsets();
    const auto cols = g.col_indices();
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        for (EdgeOffset e = offsets[i]; e < offsets[i + 1]; ++e) {
            const auto j = static_cast<std::size_t>(cols[e]);
            // Evaluate with the smaller id first so d_ij and d_ji are bitwise equal.
            const double d = i < j ? similarity(x.row(i), x.row(j), kind) : similarity(x.row(j), x.row(i), kind);
            f.d[e] = d;
            f.d_sq[e] = d * d;
        }
    }
    return f;
}

std::vector<double> neighborhood_mean(const SparseGraph& g, std::span<const double> per_entry) {
    if (per_entry.size() != g.num_entries()) {
        throw InputError("neighborhood_mean: expected " + std::to_string(g.num_entries()) +
                         " per-entry values, got " + std::to_string(per_entry.size()));
    }
    std::vector<double> out(g.num_nodes(), 0.0);
    const auto offsets = g.row_offsets();
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        if (g.degree(i) == 0) continue;
        double s = 0.0;
        for (EdgeOffset e = offsets[i]; e < offsets[i + 1]; ++e) s += per_entry[e];
        out[i] = s / g.degree(i);
    }
    return out;
}

std::vector<double> naive_localsim(const SparseGraph& g, const Matrix& x, SimilarityKind kind) {
    return neighborhood_mean(g, edge_sim_features(g, x, kind).d);
}

} // namespace lsgnn
