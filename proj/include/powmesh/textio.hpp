#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "powmesh/errors.hpp"

namespace powmesh {

/// Locale-independent fixed-point formatting (always '.' decimal separator).
inline std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline double parse_double(const std::string& tok, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected a number for " + what + ", got '" + tok + "'");
    }
}

inline std::int64_t parse_int(const std::string& tok, const std::string& what) {
    std::int64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError("expected an integer for " + what + ", got '" + tok + "'");
    return v;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

/// Parses "500KB", "1MB", "250" into bytes. Decimal units: 1 KB = 1e3 B.
inline double parse_size_bytes(const std::string& text) {
    std::string s = lower(trim(text));
    double mult = 1.0;
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "kb") == 0) {
        mult = 1e3;
        s.resize(s.size() - 2);
    } else if (s.size() >= 2 && s.compare(s.size() - 2, 2, "mb") == 0) {
        mult = 1e6;
        s.resize(s.size() - 2);
    } else if (s.size() >= 2 && s.compare(s.size() - 2, 2, "gb") == 0) {
        mult = 1e9;
        s.resize(s.size() - 2);
    } else if (!s.empty() && s.back() == 'b') {
        s.pop_back();
    }
    const double v = parse_double(trim(s), "size");
    if (v <= 0) throw ValidationError("size must be positive: '" + text + "'");
    return v * mult;
}

/// Parses "30s", "1.5m", "2h", "90" (bare = seconds) into seconds.
inline double parse_duration_s(const std::string& text) {
    std::string s = lower(trim(text));
    double mult = 1.0;
    if (!s.empty() && (s.back() == 's' || s.back() == 'm' || s.back() == 'h')) {
        if (s.back() == 'm') mult = 60.0;
        if (s.back() == 'h') mult = 3600.0;
        s.pop_back();
    }
    const double v = parse_double(trim(s), "duration");
    if (v <= 0) throw ValidationError("duration must be positive: '" + text + "'");
    return v * mult;
}

/// Expands "1..5" or "3" or "1,4,9" into an explicit seed list.
inline std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    for (const auto& part : split(text, ',')) {
        const auto dots = part.find("..");
        if (dots == std::string::npos) {
            seeds.push_back(static_cast<std::uint64_t>(parse_int(part, "seed")));
        } else {
            const auto lo = parse_int(part.substr(0, dots), "seed range start");
            const auto hi = parse_int(part.substr(dots + 2), "seed range end");
            if (hi < lo) throw ValidationError("seed range end below start: '" + part + "'");
            for (std::int64_t s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    if (seeds.empty()) throw ValidationError("empty seed list: '" + text + "'");
    return seeds;
}

/// Compact provenance form: "1..5" when contiguous, else "1;4;9".
inline std::string describe_seeds(const std::vector<std::uint64_t>& seeds) {
    bool contiguous = seeds.size() > 1;
    for (size_t i = 1; i < seeds.size() && contiguous; ++i)
        contiguous = seeds[i] == seeds[i - 1] + 1;
    if (contiguous)
        return std::to_string(seeds.front()) + ".." + std::to_string(seeds.back());
    std::string out;
    for (size_t i = 0; i < seeds.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(seeds[i]);
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
}

/// Splits text into lines, dropping blank lines and '#' comments.
inline std::vector<std::string> content_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        out.push_back(t);
    }
    return out;
}

}  // namespace powmesh
