#pragma once

// Little-endian primitive readers/writers shared by the bundle and
// checkpoint formats.

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "lsgnn/error.hpp"
#include "lsgnn/matrix.hpp"

namespace lsgnn::binio {

template <class T>
    requires std::is_arithmetic_v<T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
    requires std::is_arithmetic_v<T>
T get(std::istream& in, const char* what) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw FormatError(std::string("truncated file while reading ") + what);
    }
    return v;
}

inline void get_bytes(std::istream& in, void* dst, std::size_t n, const char* what) {
    if (!in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n))) {
        throw FormatError(std::string("truncated file while reading ") + what);
    }
}

inline void put_payload(std::ostream& out, const Matrix& m) {
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

inline Matrix get_payload(std::istream& in, std::size_t rows, std::size_t cols, const char* what) {
    Matrix m(rows, cols);
    get_bytes(in, m.data(), m.size() * sizeof(double), what);
    return m;
}

} // namespace lsgnn::binio
