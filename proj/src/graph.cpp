#include "lsgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "lsgnn/error.hpp"
#include "lsgnn/kernels.hpp"

namespace lsgnn {

SparseGraph build_graph(std::span<const Edge> edges, std::size_t n) {
    SparseGraph g;
    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
            throw InputError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                             ") out of range for n=" + std::to_string(n));
        }
        if (a == b) {
            ++g.dropped_self_loops_;
            continue;
        }
        directed.emplace_back(a, b);
        directed.emplace_back(b, a);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

    g.degrees_.assign(n, 0);
    g.col_indices_.reserve(directed.size());
    for (const auto& [a, b] : directed) {
        ++g.degrees_[a];
        g.col_indices_.push_back(b);
    }
    g.row_offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.row_offsets_[i + 1] = g.row_offsets_[i] + g.degrees_[i];
    return g;
}

std::vector<Edge> SparseGraph::edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (std::size_t i = 0; i < num_nodes(); ++i)
        for (NodeId j : neighbors(i))
            if (static_cast<NodeId>(i) < j) out.emplace_back(static_cast<NodeId>(i), j);
    return out;
}

Digest SparseGraph::digest() const {
    std::vector<std::uint8_t> bytes;
    const std::uint64_t n = num_nodes();
    auto append = [&](const void* p, std::size_t len) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes.insert(bytes.end(), b, b + len);
    };
    append(&n, sizeof n);
    append(row_offsets_.data(), row_offsets_.size() * sizeof(EdgeOffset));
    append(col_indices_.data(), col_indices_.size() * sizeof(NodeId));
    return sha256(bytes);
}

double SparseMatrix::at(std::size_t r, std::size_t c) const noexcept {
    auto first = indices.begin() + offsets[r];
    auto last = indices.begin() + offsets[r + 1];
    auto it = std::lower_bound(first, last, static_cast<NodeId>(c));
    if (it == last || *it != static_cast<NodeId>(c)) return 0.0;
    return values[static_cast<std::size_t>(it - indices.begin())];
}

Matrix SparseMatrix::to_dense() const {
    Matrix d(n_rows, n_cols);
    for (std::size_t r = 0; r < n_rows; ++r)
        for (EdgeOffset e = offsets[r]; e < offsets[r + 1]; ++e) d(r, indices[e]) = values[e];
    return d;
}

void SparseMatrix::validate() const {
    if (offsets.size() != n_rows + 1 || offsets.front() != 0 ||
        static_cast<std::size_t>(offsets.back()) != indices.size() || indices.size() != values.size()) {
        throw InputError("sparse matrix: inconsistent CSR array sizes");
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
        if (offsets[r + 1] < offsets[r]) throw InputError("sparse matrix: offsets not monotone");
        for (EdgeOffset e = offsets[r]; e < offsets[r + 1]; ++e) {
            if (indices[e] < 0 || static_cast<std::size_t>(indices[e]) >= n_cols)
                throw InputError("sparse matrix: column index out of range");
            if (e > offsets[r] && indices[e] <= indices[e - 1])
                throw InputError("sparse matrix: columns not strictly ascending");
        }
    }
}

SparseMatrix sym_norm_adj(const SparseGraph& g) {
    const std::size_t n = g.num_nodes();
    SparseMatrix s;
    s.n_rows = s.n_cols = n;
    s.offsets.assign(g.row_offsets().begin(), g.row_offsets().end());
    s.indices.assign(g.col_indices().begin(), g.col_indices().end());
    s.values.resize(s.indices.size());
    std::vector<double> inv_sqrt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (g.degree(i) > 0) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i)));
    for (std::size_t i = 0; i < n; ++i)
        for (EdgeOffset e = s.offsets[i]; e < s.offsets[i + 1]; ++e)
            s.values[e] = inv_sqrt[i] * inv_sqrt[s.indices[e]];
    return s;
}

SparseMatrix add_identity(const SparseMatrix& a, double beta) {
    if (a.n_rows != a.n_cols) throw InputError("add_identity needs a square matrix");
    SparseMatrix out;
    out.n_rows = out.n_cols = a.n_rows;
    out.offsets.assign(a.n_rows + 1, 0);
    out.indices.reserve(a.nnz() + a.n_rows);
    out.values.reserve(a.nnz() + a.n_rows);
    for (std::size_t r = 0; r < a.n_rows; ++r) {
        bool placed = false;
        const auto diag = static_cast<NodeId>(r);
        for (EdgeOffset e = a.offsets[r]; e < a.offsets[r + 1]; ++e) {
            if (!placed && a.indices[e] >= diag) {
                if (a.indices[e] == diag) {
                    out.indices.push_back(diag);
                    out.values.push_back(a.values[e] + beta);
                    placed = true;
                    continue;
                }
                out.indices.push_back(diag);
                out.values.push_back(beta);
                placed = true;
            }
            out.indices.push_back(a.indices[e]);
            out.values.push_back(a.values[e]);
        }
        if (!placed) {
            out.indices.push_back(diag);
            out.values.push_back(beta);
        }
        out.offsets[r + 1] = static_cast<EdgeOffset>(out.indices.size());
    }
    return out;
}

SparseMatrix scaled(const SparseMatrix& a, double alpha) {
    SparseMatrix out = a;
    for (double& v : out.values) v *= alpha;
    return out;
}

SparseMatrix self_loop_adj(const SparseGraph& g) {
    SparseMatrix a;
    a.n_rows = a.n_cols = g.num_nodes();
    a.offsets.assign(g.row_offsets().begin(), g.row_offsets().end());
    a.indices.assign(g.col_indices().begin(), g.col_indices().end());
    a.values.assign(a.indices.size(), 1.0);
    return add_identity(a, 1.0);
}

FilterPair enhanced_filters(const SparseGraph& g, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw InputError("beta must lie in [0, 1], got " + std::to_string(beta));
    const SparseMatrix norm = sym_norm_adj(g);
    FilterPair f;
    f.beta = beta;
    f.low = add_identity(norm, beta);
    f.high = add_identity(scaled(norm, -1.0), 1.0 - beta);
    return f;
}

Matrix spmm(const SparseMatrix& s, const Matrix& x) {
    if (s.n_cols != x.rows()) {
        throw InputError("spmm shape mismatch: filter has " + std::to_string(s.n_cols) +
                         " columns, features have " + std::to_string(x.rows()) + " rows");
    }
    Matrix out(s.n_rows, x.cols());
    kernels::active().spmm(s.n_rows, s.offsets.data(), s.indices.data(), s.values.data(), x.data(),
                           x.cols(), out.data());
    return out;
}

HomophilyReport node_homophily(const SparseGraph& g, std::span<const std::int32_t> labels) {
    const std::size_t n = g.num_nodes();
    if (labels.size() != n) {
        throw InputError("label vector has " + std::to_string(labels.size()) + " entries, graph has " +
                         std::to_string(n) + " nodes");
    }
    HomophilyReport rep;
    rep.per_node.assign(n, 0.0);
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (g.degree(i) == 0) continue;
        std::size_t same = 0;
        for (NodeId j : g.neighbors(i)) same += labels[j] == labels[i] ? 1 : 0;
        rep.per_node[i] = static_cast<double>(same) / g.degree(i);
        sum += rep.per_node[i];
        ++counted;
    }
    rep.graph_level = counted == 0 ? 0.0 : sum / static_cast<double>(counted);
    return rep;
}

std::vector<Edge> read_edge_list(const std::filesystem::path& path, std::size_t* max_id_plus_one) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open edge list " + path.string());
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    long long max_id = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        long long a = 0, b = 0;
        if (!(ss >> a)) continue; // blank or comment-only
        std::string rest;
        if (!(ss >> b) || (ss >> rest)) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected two node ids");
        }
        if (a < 0 || b < 0 || a > INT32_MAX || b > INT32_MAX) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": node id out of range");
        }
        edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
        max_id = std::max({max_id, a, b});
    }
    if (max_id_plus_one) *max_id_plus_one = static_cast<std::size_t>(max_id + 1);
    return edges;
}

void write_edge_list(const std::filesystem::path& path, const SparseGraph& g) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "# nodes " << g.num_nodes() << " edges " << g.num_edges() << "\n";
    for (const auto& [a, b] : g.edge_list()) out << a << ' ' << b << '\n';
}

SparseGraph permute(const SparseGraph& g, std::span<const NodeId> perm) {
    if (perm.size() != g.num_nodes()) throw InputError("permutation size mismatch");
    std::vector<Edge> edges;
    for (const auto& [a, b] : g.edge_list()) edges.emplace_back(perm[a], perm[b]);
    return build_graph(edges, g.num_nodes());
}

} // namespace lsgnn
