#pragma once

#include <charconv>
#include <cmath>
#include <span>
#include <string>

namespace limitlab {

/// Shortest round-trip decimal form of `x`; integral values keep a ".0"
/// so they read as reals ("1.0", not "1").
inline std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

/// Fixed 17-significant-digit form used in CSV exports.
inline std::string format_csv(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string format_point(std::span<const double> x) {
    if (x.size() == 1) return format_real(x[0]);
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ", ";
        s += format_real(x[i]);
    }
    return s + ")";
}

}  // namespace limitlab
