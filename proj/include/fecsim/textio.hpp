#pragma once

// Locale-free, byte-stable number formatting and strict parsing. All CSV and
// config output goes through format_double so identical runs serialize to
// identical bytes on any platform.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

#include "fecsim/errors.hpp"

namespace fecsim {

// Shortest representation that round-trips exactly.
inline std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// Whole-token parse; rejects trailing garbage.
inline bool try_parse_double(std::string_view token, double& out) {
    token = trim(token);
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline double parse_double(std::string_view token, const std::string& what) {
    double v;
    if (!try_parse_double(token, v))
        throw ParseError(what + ": not a number: '" + std::string(token) + "'");
    return v;
}

inline std::uint64_t parse_u64(std::string_view token, const std::string& what) {
    token = trim(token);
    std::uint64_t v = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || token.empty())
        throw ParseError(what + ": not a non-negative integer: '" + std::string(token) + "'");
    return v;
}

inline bool parse_bool(std::string_view token, const std::string& what) {
    token = trim(token);
    if (token == "true" || token == "1" || token == "on") return true;
    if (token == "false" || token == "0" || token == "off") return false;
    throw ParseError(what + ": not a boolean: '" + std::string(token) + "'");
}

}  // namespace fecsim
