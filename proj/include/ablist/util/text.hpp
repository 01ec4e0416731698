#pragma once

// Small text helpers shared by the record formats. Doubles are written in
// shortest round-trip form so files reload bit-exactly.

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace ablist::util {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

template <class Int = std::uint64_t>
Int parse_int(std::string_view s) {
    Int v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw ParseError("not an integer: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

template <class Range, class Fn>
std::string join(const Range& r, char sep, Fn&& fmt) {
    std::string out;
    bool first = true;
    for (const auto& v : r) {
        if (!first) out += sep;
        out += fmt(v);
        first = false;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace ablist::util
