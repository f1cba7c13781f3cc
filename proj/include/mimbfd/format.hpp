#pragma once

#include <charconv>
#include <string>

namespace mimbfd {

// Shortest round-trip decimal form; stable across runs, exact on reload.
inline std::string fmt_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace mimbfd
