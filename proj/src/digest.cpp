#include "lsgnn/digest.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace lsgnn {
namespace {

static_assert(std::endian::native == std::endian::little, "bundle formats assume little-endian hosts");

struct Hasher {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

    Hasher() {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("sha256 init failed");
    }
    void update(const void* p, std::size_t n) {
        if (EVP_DigestUpdate(ctx.get(), p, n) != 1) throw std::runtime_error("sha256 update failed");
    }
    Digest finish() {
        Digest out{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size())
            throw std::runtime_error("sha256 final failed");
        return out;
    }
};

} // namespace

Digest sha256(std::span<const std::uint8_t> bytes) {
    Hasher h;
    h.update(bytes.data(), bytes.size());
    return h.finish();
}

Digest feature_digest(const Matrix& m) {
    Hasher h;
    const std::uint64_t shape[2] = {m.rows(), m.cols()};
    h.update(shape, sizeof(shape));
    h.update(m.data(), m.size() * sizeof(double));
    return h.finish();
}

std::string to_hex(const Digest& d) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (auto b : d) {
        s.push_back(kHex[b >> 4]);
        s.push_back(kHex[b & 0xF]);
    }
    return s;
}

} // namespace lsgnn
