#include <array>
#include <fstream>

#include "lsgnn/binary_io.hpp"
#include "lsgnn/error.hpp"
#include "lsgnn/propagation.hpp"

namespace lsgnn {
namespace {
constexpr std::array<char, 4> kMagic{'L', 'S', 'P', 'B'};
// Guards against absurd allocations from a corrupted header.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;
} // namespace

void save_bundle(const PropagationStack& stack, const std::filesystem::path& path) {
    const auto& cfg = stack.config;
    if (stack.low_layers.size() != cfg.K || stack.high_layers.size() != cfg.K) {
        throw InputError("bundle layer count does not match K");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write bundle " + path.string());
    out.write(kMagic.data(), kMagic.size());
    binio::put<std::uint32_t>(out, kBundleVersion);
    binio::put<std::uint64_t>(out, stack.num_nodes());
    binio::put<std::uint64_t>(out, stack.feature_dim());
    binio::put<std::uint32_t>(out, cfg.K);
    binio::put<double>(out, cfg.gamma);
    binio::put<double>(out, cfg.beta);
    binio::put<std::uint8_t>(out, static_cast<std::uint8_t>(cfg.variant));
    binio::put<std::uint8_t>(out, cfg.normalize ? 1 : 0);
    out.write(reinterpret_cast<const char*>(stack.feature_digest.data()), stack.feature_digest.size());
    for (const auto& m : stack.low_layers) binio::put_payload(out, m);
    for (const auto& m : stack.high_layers) binio::put_payload(out, m);
    if (!out) throw FormatError("failed writing bundle " + path.string());
}

PropagationStack load_bundle(const std::filesystem::path& path, const Matrix* features) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open bundle " + path.string());
    std::array<char, 4> magic{};
    binio::get_bytes(in, magic.data(), magic.size(), "magic");
    if (magic != kMagic) throw FormatError(path.string() + ": not a propagation bundle (bad magic)");
    const auto version = binio::get<std::uint32_t>(in, "version");
    if (version != kBundleVersion) {
        throw FormatError(path.string() + ": unsupported bundle version " + std::to_string(version));
    }
    const auto n = binio::get<std::uint64_t>(in, "n");
    const auto d = binio::get<std::uint64_t>(in, "d");
    PropagationStack stack;
    auto& cfg = stack.config;
    cfg.K = binio::get<std::uint32_t>(in, "K");
    cfg.gamma = binio::get<double>(in, "gamma");
    cfg.beta = binio::get<double>(in, "beta");
    const auto variant = binio::get<std::uint8_t>(in, "variant");
    if (variant > 3) throw FormatError(path.string() + ": unknown variant tag");
    cfg.variant = static_cast<PropagationVariant>(variant);
    const auto normalize = binio::get<std::uint8_t>(in, "normalize flag");
    if (normalize > 1) throw FormatError(path.string() + ": bad normalize flag");
    cfg.normalize = normalize == 1;
    binio::get_bytes(in, stack.feature_digest.data(), stack.feature_digest.size(), "feature digest");
    if (cfg.K < 1 || n * d * 2 * cfg.K > kMaxElements) throw FormatError(path.string() + ": implausible header");

    if (features != nullptr) {
        if (features->rows() != n || features->cols() != d || feature_digest(*features) != stack.feature_digest) {
            throw DigestError(path.string() + ": bundle was computed from different features");
        }
    }
    for (std::uint32_t k = 0; k < cfg.K; ++k) stack.low_layers.push_back(binio::get_payload(in, n, d, "low layer"));
    for (std::uint32_t k = 0; k < cfg.K; ++k) stack.high_layers.push_back(binio::get_payload(in, n, d, "high layer"));
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
    return stack;
}

} // namespace lsgnn
