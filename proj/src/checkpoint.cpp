#include <array>
#include <fstream>

#include "lsgnn/binary_io.hpp"
#include "lsgnn/error.hpp"
#include "lsgnn/model.hpp"

namespace lsgnn {
namespace {
constexpr std::array<char, 4> kMagic{'L', 'S', 'P', 'M'};
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 24;
} // namespace

// Layout: magic, u32 version, config header, u32 tensor count, then per
// tensor u64 rows, u64 cols and the row-major f64 payload.
void save_checkpoint(const ModelConfig& cfg, const ModelParameters& params, const std::filesystem::path& path) {
    if (!params.shapes_match(cfg)) throw InputError("checkpoint parameters do not match config");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write checkpoint " + path.string());
    out.write(kMagic.data(), kMagic.size());
    binio::put<std::uint32_t>(out, kCheckpointVersion);
    binio::put<std::uint32_t>(out, cfg.K);
    binio::put<std::uint64_t>(out, cfg.d);
    binio::put<std::uint64_t>(out, cfg.z);
    binio::put<std::uint64_t>(out, cfg.C);
    binio::put<std::uint64_t>(out, cfg.h_ls);
    binio::put<std::uint64_t>(out, cfg.h_alpha);
    binio::put<std::uint8_t>(out, static_cast<std::uint8_t>(cfg.sim_kind));
    binio::put<double>(out, cfg.dropout);
    binio::put<std::uint8_t>(out, static_cast<std::uint8_t>(cfg.weight_mode));
    binio::put<std::uint8_t>(out, static_cast<std::uint8_t>(cfg.localsim_mode));
    const auto tensors = params.tensors();
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const Matrix* t : tensors) {
        binio::put<std::uint64_t>(out, t->rows());
        binio::put<std::uint64_t>(out, t->cols());
        binio::put_payload(out, *t);
    }
    if (!out) throw FormatError("failed writing checkpoint " + path.string());
}

std::pair<ModelConfig, ModelParameters> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint " + path.string());
    std::array<char, 4> magic{};
    binio::get_bytes(in, magic.data(), magic.size(), "magic");
    if (magic != kMagic) throw FormatError(path.string() + ": not a model checkpoint (bad magic)");
    const auto version = binio::get<std::uint32_t>(in, "version");
    if (version != kCheckpointVersion) {
        throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
    }
    ModelConfig cfg;
    cfg.K = binio::get<std::uint32_t>(in, "K");
    cfg.d = binio::get<std::uint64_t>(in, "d");
    cfg.z = binio::get<std::uint64_t>(in, "z");
    cfg.C = binio::get<std::uint64_t>(in, "C");
    cfg.h_ls = binio::get<std::uint64_t>(in, "h_ls");
    cfg.h_alpha = binio::get<std::uint64_t>(in, "h_alpha");
    const auto sim = binio::get<std::uint8_t>(in, "sim_kind");
    cfg.dropout = binio::get<double>(in, "dropout");
    const auto wmode = binio::get<std::uint8_t>(in, "weight_mode");
    const auto lmode = binio::get<std::uint8_t>(in, "localsim_mode");
    if (sim > 2 || wmode > 1 || lmode > 1) throw FormatError(path.string() + ": bad enum in header");
    cfg.sim_kind = static_cast<SimilarityKind>(sim);
    cfg.weight_mode = static_cast<WeightMode>(wmode);
    cfg.localsim_mode = static_cast<LocalSimMode>(lmode);
    for (std::uint64_t dim : {std::uint64_t{cfg.K}, std::uint64_t{cfg.d}, std::uint64_t{cfg.z},
                              std::uint64_t{cfg.C}, std::uint64_t{cfg.h_ls}, std::uint64_t{cfg.h_alpha}}) {
        if (dim > kMaxDim) throw FormatError(path.string() + ": implausible header");
    }
    try {
        cfg.validate();
    } catch (const InputError& e) {
        throw FormatError(path.string() + ": invalid config in header: " + e.what());
    }

    ModelParameters params = ModelParameters::zeros(cfg);
    auto tensors = params.tensors();
    const auto count = binio::get<std::uint32_t>(in, "tensor count");
    if (count != tensors.size()) throw FormatError(path.string() + ": unexpected tensor count");
    for (Matrix* t : tensors) {
        const auto rows = binio::get<std::uint64_t>(in, "tensor rows");
        const auto cols = binio::get<std::uint64_t>(in, "tensor cols");
        if (rows != t->rows() || cols != t->cols()) throw FormatError(path.string() + ": tensor shape mismatch");
        *t = binio::get_payload(in, rows, cols, "tensor payload");
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
    return {cfg, std::move(params)};
}

} // namespace lsgnn
