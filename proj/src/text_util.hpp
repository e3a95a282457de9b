#pragma once

#include "mlcm/error.hpp"

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace mlcm::detail {

// Locale-independent double formatting with enough digits to round-trip
// exactly through text.
inline std::string format_double(double v) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view token, int line_no) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw ParseError(line_no, "malformed number '" + std::string(token) + "'");
    return value;
}

inline std::vector<std::string_view> split_view(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace mlcm::detail
