#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "lsgnn/digest.hpp"
#include "lsgnn/matrix.hpp"

namespace lsgnn {

using NodeId = std::int32_t;
using EdgeOffset = std::int64_t;
using Edge = std::pair<NodeId, NodeId>;

/**
 * Undirected, unweighted, self-loop-free graph in CSR form.
 *
 * Both orientations of every edge are stored, neighbors are sorted ascending
 * within each row and there are no duplicates. Immutable once built; share
 * freely across threads.
 */
class SparseGraph {
public:
    SparseGraph() = default;

    std::size_t num_nodes() const noexcept { return degrees_.size(); }
    // Directed CSR entries, i.e. twice the undirected edge count.
    std::size_t num_entries() const noexcept { return col_indices_.size(); }
    std::size_t num_edges() const noexcept { return col_indices_.size() / 2; }

    std::span<const EdgeOffset> row_offsets() const noexcept { return row_offsets_; }
    std::span<const NodeId> col_indices() const noexcept { return col_indices_; }
    std::span<const std::int32_t> degrees() const noexcept { return degrees_; }

    std::int32_t degree(std::size_t i) const noexcept { return degrees_[i]; }
    std::span<const NodeId> neighbors(std::size_t i) const noexcept {
        return {col_indices_.data() + row_offsets_[i],
                static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i])};
    }

    // Self-loop pairs that were present in the input edge list and discarded.
    std::size_t dropped_self_loops() const noexcept { return dropped_self_loops_; }

    // Canonical undirected edge list (i < j), lexicographically sorted.
    std::vector<Edge> edge_list() const;

    Digest digest() const;

    friend SparseGraph build_graph(std::span<const Edge> edges, std::size_t n);

private:
    std::vector<EdgeOffset> row_offsets_{0};
    std::vector<NodeId> col_indices_;
    std::vector<std::int32_t> degrees_;
    std::size_t dropped_self_loops_ = 0;
};

// Symmetrize, deduplicate and drop self-loops. Throws InputError on ids outside [0, n).
SparseGraph build_graph(std::span<const Edge> edges, std::size_t n);

/// Weighted CSR matrix; rows sorted by column.
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<EdgeOffset> offsets{0};
    std::vector<NodeId> indices;
    std::vector<double> values;

    std::size_t nnz() const noexcept { return values.size(); }
    double at(std::size_t r, std::size_t c) const noexcept; // 0 when not stored
    Matrix to_dense() const;
    void validate() const;                                  // throws InputError
};

// D^{-1/2} A D^{-1/2}; rows of isolated nodes are empty.
SparseMatrix sym_norm_adj(const SparseGraph& g);

// A + I, unnormalized.
SparseMatrix self_loop_adj(const SparseGraph& g);

// beta * I + a (structure union of a and the diagonal).
SparseMatrix add_identity(const SparseMatrix& a, double beta);
// alpha * a
SparseMatrix scaled(const SparseMatrix& a, double alpha);

struct FilterPair {
    double beta = 0.0;
    SparseMatrix low;   // beta * I + normA
    SparseMatrix high;  // (1 - beta) * I - normA
};

// Low/high-pass pair summing to the identity. Throws InputError unless beta in [0, 1].
FilterPair enhanced_filters(const SparseGraph& g, double beta);

// out = s * x via the active kernel table.
Matrix spmm(const SparseMatrix& s, const Matrix& x);

struct HomophilyReport {
    std::vector<double> per_node;  // 0 for isolated nodes
    double graph_level = 0.0;      // mean over nodes with degree > 0
};

HomophilyReport node_homophily(const SparseGraph& g, std::span<const std::int32_t> labels);

// Edge-list text: one "i j" pair per line, '#' starts a comment.
std::vector<Edge> read_edge_list(const std::filesystem::path& path, std::size_t* max_id_plus_one = nullptr);
void write_edge_list(const std::filesystem::path& path, const SparseGraph& g);

// Relabel node i as perm[i].
SparseGraph permute(const SparseGraph& g, std::span<const NodeId> perm);

} // namespace lsgnn
