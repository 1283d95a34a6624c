#pragma once

#include <stdexcept>
#include <string>

namespace lsgnn {

// Bad arguments: shape mismatches, out-of-range ids, parameters outside their domain.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed files: bad magic, truncation, ragged rows, unparsable tokens.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// A persisted bundle does not belong to the features it is being used with.
class DigestError : public std::runtime_error {
public:
    explicit DigestError(const std::string& what) : std::runtime_error(what) {}
};

// Optimization diverged (non-finite loss).
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lsgnn
