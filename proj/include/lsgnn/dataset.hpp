#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lsgnn/graph.hpp"
#include "lsgnn/matrix.hpp"
#include "lsgnn/model.hpp"

namespace lsgnn {

/// Graph, node features and dense class labels in [0, num_classes).
struct DatasetBundle {
    SparseGraph graph;
    Matrix features;
    Labels labels;
    std::size_t num_classes = 0;
    std::string name;

    void validate() const;  // throws InputError
};

// Canonical directory layout: edges.txt, features.csv (one node per line,
// comma-separated), labels.txt (one integer per line).
DatasetBundle load_dataset(const std::filesystem::path& dir);
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

struct SplitSpec {
    Mask train, val, test;
    std::uint64_t seed = 0;
    std::array<double, 3> ratios{0.48, 0.32, 0.20};
};

inline constexpr std::array<double, 3> kDefaultSplitRatios{0.48, 0.32, 0.20};

// `count` independent random splits; split s shuffles with seed base_seed + s.
// Sizes are floor(ratio * n) for train and validation, the rest goes to test.
std::vector<SplitSpec> make_splits(std::size_t n, std::array<double, 3> ratios, std::uint64_t base_seed,
                                   std::size_t count);

struct DatasetStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t classes = 0;
    std::size_t feature_dim = 0;
    double homophily = 0.0;
};

DatasetStats dataset_stats(const DatasetBundle& bundle);

} // namespace lsgnn
