#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "corepick/error.hpp"

namespace corepick {

// Shortest decimal string that round-trips the exact double value.
// Used everywhere a real number is written to a file, so that re-running a
// command reproduces output files byte for byte.
inline std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

// Strict full-match parse; `context` names the cell/field for the error.
inline double parse_double(std::string_view text, std::string_view context) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) {
        fail("non-numeric value \"", std::string(text), "\" in ", context);
    }
    return value;
}

inline double parse_finite_double(std::string_view text, std::string_view context) {
    double value = parse_double(text, context);
    if (!std::isfinite(value)) {
        fail("non-finite value \"", std::string(text), "\" in ", context);
    }
    return value;
}

} // namespace corepick
