#include "lsgnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "lsgnn/error.hpp"

namespace lsgnn {

void DatasetBundle::validate() const {
    const std::size_t n = graph.num_nodes();
    if (features.rows() != n) throw InputError("dataset: feature rows != node count");
    if (labels.size() != n) throw InputError("dataset: label count != node count");
    std::vector<std::uint8_t> seen(num_classes, 0);
    for (auto y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) throw InputError("dataset: label out of range");
        seen[y] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw InputError("dataset: class ids are not dense");
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

namespace {

double parse_double(std::string_view tok, const std::string& where) {
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
        throw FormatError(where + ": cannot parse number '" + std::string(tok) + "'");
    }
    return v;
}

Matrix read_features(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("missing features file " + path.string());
    std::vector<double> data;
    std::size_t cols = 0, rows = 0, lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        std::size_t count = 0;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            data.push_back(parse_double(rest.substr(0, comma), where));
            ++count;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (rows == 0) cols = count;
        else if (count != cols) {
            throw FormatError(where + ": ragged feature row (" + std::to_string(count) + " values, expected " +
                              std::to_string(cols) + ")");
        }
        ++rows;
    }
    return Matrix(rows, cols, std::move(data));
}

Labels read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("missing labels file " + path.string());
    Labels labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        long long y = 0;
        if (!(ss >> y)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected an integer label");
        }
        std::string extra;
        if (ss >> extra || y < 0 || y > INT32_MAX) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad label");
        }
        labels.push_back(static_cast<std::int32_t>(y));
    }
    return labels;
}

} // namespace

DatasetBundle load_dataset(const std::filesystem::path& dir) {
    DatasetBundle b;
    b.name = dir.filename().string();
    b.features = read_features(dir / "features.csv");
    b.labels = read_labels(dir / "labels.txt");
    const std::size_t n = b.features.rows();
    if (b.labels.size() != n) {
        throw FormatError(dir.string() + ": " + std::to_string(b.labels.size()) + " labels but " +
                          std::to_string(n) + " feature rows");
    }
    std::size_t max_id = 0;
    const auto edges = read_edge_list(dir / "edges.txt", &max_id);
    if (max_id > n) throw FormatError(dir.string() + ": edge list references node beyond feature rows");
    b.graph = build_graph(edges, n);

    std::int32_t max_label = -1;
    for (auto y : b.labels) max_label = std::max(max_label, y);
    b.num_classes = static_cast<std::size_t>(max_label + 1);
    std::vector<std::uint8_t> seen(b.num_classes, 0);
    for (auto y : b.labels) seen[y] = 1;
    for (std::size_t c = 0; c < b.num_classes; ++c) {
        if (!seen[c]) throw FormatError(dir.string() + ": labels are not dense, class " + std::to_string(c) + " is missing");
    }
    return b;
}

void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir) {
    bundle.validate();
    std::filesystem::create_directories(dir);
    write_edge_list(dir / "edges.txt", bundle.graph);
    {
        std::ofstream out(dir / "features.csv");
        if (!out) throw FormatError("cannot write " + (dir / "features.csv").string());
        for (std::size_t i = 0; i < bundle.features.rows(); ++i) {
            const auto row = bundle.features.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
            out << '\n';
        }
    }
    std::ofstream out(dir / "labels.txt");
    if (!out) throw FormatError("cannot write " + (dir / "labels.txt").string());
    for (auto y : bundle.labels) out << y << '\n';
}

std::vector<SplitSpec> make_splits(std::size_t n, std::array<double, 3> ratios, std::uint64_t base_seed,
                                   std::size_t count) {
    for (double r : ratios)
        if (!(r > 0.0)) throw InputError("split ratios must be positive");
    const double total = ratios[0] + ratios[1] + ratios[2];
    if (total > 1.0 + 1e-9) throw InputError("split ratios sum to more than 1");
    const auto n_train = static_cast<std::size_t>(std::floor(ratios[0] * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::floor(ratios[1] * static_cast<double>(n)));
    const std::size_t n_test = total >= 1.0 - 1e-9
                                   ? n - n_train - n_val
                                   : static_cast<std::size_t>(std::floor(ratios[2] * static_cast<double>(n)));
    if (n_train == 0 || n_val == 0 || n_test == 0) {
        throw InputError("n=" + std::to_string(n) + " is too small for nonempty train/val/test masks");
    }
    std::vector<SplitSpec> splits;
    splits.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        SplitSpec sp;
        sp.seed = base_seed + s;
        sp.ratios = ratios;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(sp.seed);
        std::shuffle(order.begin(), order.end(), rng);
        sp.train.assign(n, 0);
        sp.val.assign(n, 0);
        sp.test.assign(n, 0);
        for (std::size_t i = 0; i < n_train; ++i) sp.train[order[i]] = 1;
        for (std::size_t i = n_train; i < n_train + n_val; ++i) sp.val[order[i]] = 1;
        for (std::size_t i = n_train + n_val; i < n_train + n_val + n_test; ++i) sp.test[order[i]] = 1;
        splits.push_back(std::move(sp));
    }
    return splits;
}

DatasetStats dataset_stats(const DatasetBundle& bundle) {
    DatasetStats s;
    s.nodes = bundle.graph.num_nodes();
    s.edges = bundle.graph.num_edges();
    s.classes = bundle.num_classes;
    s.feature_dim = bundle.features.cols();
    s.homophily = node_homophily(bundle.graph, bundle.labels).graph_level;
    return s;
}

} // namespace lsgnn
