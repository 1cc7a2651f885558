#pragma once

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace ems {

/// Error with a short context tag, thrown for bad input data or misuse of a
/// module contract. Numerical outcomes (divergence, infeasibility) are not
/// exceptions; they are carried in result types.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when removing a network element would split the grid into islands.
class IslandingError : public Error {
public:
    using Error::Error;
};

// printf-style formatting into std::string (std::format is not available on
// the toolchains this project targets).
template <typename... Args>
std::string strfmt(const char* fmt, Args... args) {
    int n = std::snprintf(nullptr, 0, fmt, args...);
    std::string s(static_cast<size_t>(n), '\0');
    std::snprintf(s.data(), s.size() + 1, fmt, args...);
    return s;
}

/// Shortest decimal string that round-trips to the exact same double.
inline std::string round_trip_str(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace ems
