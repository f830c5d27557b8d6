// Copyright 2026 The rooftherm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <rooftherm/error.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace rooftherm::detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Strict full-token double parse; accepts a leading '+'.
inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

/// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

/// `%g`-style output with `digits` significant digits.
inline std::string format_general(double v, int digits) {
    std::array<char, 64> buf{};
    auto [ptr, ec] =
        std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, digits);
    return std::string(buf.data(), ptr);
}

inline std::string format_fixed(double v, int decimals) {
    std::array<char, 64> buf{};
    auto [ptr, ec] =
        std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, decimals);
    return std::string(buf.data(), ptr);
}

/// Splits on commas when the line contains one, otherwise on whitespace.
inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    if (line.find(',') != std::string_view::npos) {
        std::size_t start = 0;
        while (true) {
            auto pos = line.find(',', start);
            out.push_back(trim(line.substr(start, pos - start)));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        return out;
    }
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

/// Comma-separated table with a header row. Cells are trimmed; empty lines
/// and lines starting with '#' are skipped.
class CsvTable {
public:
    static CsvTable parse(std::string_view text) {
        CsvTable t;
        std::size_t lineno = 0;
        bool have_header = false;
        for (auto raw : split_lines(text)) {
            ++lineno;
            auto line = trim(raw);
            if (line.empty() || line.front() == '#') continue;
            std::vector<std::string> cells;
            std::size_t start = 0;
            while (true) {
                auto pos = line.find(',', start);
                cells.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
                if (pos == std::string_view::npos) break;
                start = pos + 1;
            }
            if (!have_header) {
                for (std::size_t i = 0; i < cells.size(); ++i) t.columns_[lower(cells[i])] = i;
                t.header_ = std::move(cells);
                have_header = true;
                continue;
            }
            if (cells.size() > t.header_.size())
                throw ParseError("expected at most " + std::to_string(t.header_.size()) + " fields, found " +
                                     std::to_string(cells.size()),
                                 lineno);
            cells.resize(t.header_.size());
            t.rows_.push_back(std::move(cells));
            t.lines_.push_back(lineno);
        }
        if (!have_header) throw ParseError("missing header row", 0);
        return t;
    }

    bool has(std::string_view column) const { return columns_.count(lower(column)) != 0; }

    void require(std::initializer_list<std::string_view> columns) const {
        for (auto c : columns)
            if (!has(c)) throw ParseError("missing column '" + std::string(c) + "'", 0);
    }

    std::size_t size() const { return rows_.size(); }
    std::size_t line(std::size_t row) const { return lines_[row]; }

    const std::string& cell(std::size_t row, std::string_view column) const {
        static const std::string empty;
        auto it = columns_.find(lower(column));
        if (it == columns_.end()) return empty;
        return rows_[row][it->second];
    }

    double number(std::size_t row, std::string_view column) const {
        auto v = parse_double(cell(row, column));
        if (!v) throw ParseError("non-numeric value in column '" + std::string(column) + "'", lines_[row]);
        return *v;
    }

    std::optional<double> optional_number(std::size_t row, std::string_view column) const {
        const auto& c = cell(row, column);
        if (c.empty()) return std::nullopt;
        return number(row, column);
    }

private:
    std::vector<std::string> header_;
    std::map<std::string, std::size_t> columns_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> lines_;
};

inline bool parse_bool(std::string_view s) {
    auto l = lower(trim(s));
    return l == "1" || l == "true" || l == "yes";
}

} // namespace rooftherm::detail
