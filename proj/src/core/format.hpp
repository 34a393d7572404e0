#pragma once

#include <charconv>
#include <string>

namespace ilab {

/// Shortest decimal string that parses back to exactly `x`.
inline std::string shortest(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

} // namespace ilab
