#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "lsgnn/matrix.hpp"

namespace lsgnn {

using Digest = std::array<std::uint8_t, 32>;

// SHA-256 over raw bytes.
Digest sha256(std::span<const std::uint8_t> bytes);

// Content hash of a feature matrix: shape (two little-endian u64) followed by
// the row-major little-endian f64 payload.
Digest feature_digest(const Matrix& m);

std::string to_hex(const Digest& d);

} // namespace lsgnn
