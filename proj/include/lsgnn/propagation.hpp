#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsgnn/digest.hpp"
#include "lsgnn/graph.hpp"
#include "lsgnn/matrix.hpp"

namespace lsgnn {

enum class PropagationVariant : std::uint8_t {
    irdc = 0,
    sgc = 1,
    initial_residual = 2,
    difference_residual = 3,
};

std::string_view to_string(PropagationVariant v) noexcept;
PropagationVariant parse_variant(std::string_view s);  // throws InputError

struct PropagationConfig {
    std::uint32_t K = 5;
    double gamma = 0.5;
    double beta = 0.5;
    PropagationVariant variant = PropagationVariant::irdc;
    bool normalize = true;

    void validate() const;  // throws InputError
    friend bool operator==(const PropagationConfig&, const PropagationConfig&) = default;
};

/// Precomputed low/high-pass layer outputs for one (graph, features, config).
struct PropagationStack {
    PropagationConfig config;
    std::vector<Matrix> low_layers;
    std::vector<Matrix> high_layers;
    Digest feature_digest{};

    std::size_t num_nodes() const noexcept { return low_layers.empty() ? 0 : low_layers.front().rows(); }
    std::size_t feature_dim() const noexcept { return low_layers.empty() ? 0 : low_layers.front().cols(); }

    friend bool operator==(const PropagationStack&, const PropagationStack&) = default;
};

// Initial residual difference connection:
//   H1 = S X,  Hk = S ((1 - gamma) X - gamma * sum_{l<k} Hl)
// The running sum uses the raw layer outputs.
std::vector<Matrix> irdc(const SparseMatrix& s, const Matrix& x, std::uint32_t k, double gamma);

// Baseline recurrences with coefficients omitted:
//   sgc                  Zk = S Z(k-1)
//   initial_residual     Zk = X + S Z(k-1)
//   difference_residual  Z1 = S X, Zk = S (Z(k-2) - Z(k-1))
// with Z0 = X. irdc is rejected here; use irdc() or propagate().
std::vector<Matrix> residual_propagate(PropagationVariant variant, const SparseMatrix& s,
                                       const Matrix& x, std::uint32_t k);

// Dispatches to irdc() or residual_propagate().
std::vector<Matrix> propagate(PropagationVariant variant, const SparseMatrix& s, const Matrix& x,
                              std::uint32_t k, double gamma);

// Unit L2 norm per nonzero row; zero rows pass through.
Matrix row_normalize(const Matrix& m);

PropagationStack precompute_bundle(const SparseGraph& g, const Matrix& x, const PropagationConfig& cfg);

// Same pipeline with caller-supplied filters (e.g. A + I and its complement);
// cfg.beta is recorded but not used to build anything.
PropagationStack precompute_with_filters(const FilterPair& filters, const Matrix& x,
                                         const PropagationConfig& cfg);

// Binary bundle ("LSPB"). load_bundle verifies the stored digest against
// `features` when given and throws DigestError on mismatch.
inline constexpr std::uint32_t kBundleVersion = 1;
void save_bundle(const PropagationStack& stack, const std::filesystem::path& path);
PropagationStack load_bundle(const std::filesystem::path& path, const Matrix* features = nullptr);

} // namespace lsgnn
