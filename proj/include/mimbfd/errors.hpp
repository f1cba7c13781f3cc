#pragma once

#include <stdexcept>
#include <string>

namespace mimbfd {

// Error taxonomy shared by the whole library. The CLI maps these to exit
// codes: ConfigError -> 1, everything else -> 2.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (missing file, ragged row, bad token).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Edge endpoint or row index out of range.
struct IndexError : std::runtime_error {
    explicit IndexError(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible tensor shapes; message names the offending op.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Divergence, NaN, or non-convergence within the iteration budget.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse (e.g. backward called twice on one tape).
struct StateError : std::runtime_error {
    explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mimbfd
