#pragma once

// Fixed CSV dialect (comma, '.', header row, LF) and SHA-256 checksums.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <openssl/evp.h>

#include "rwave/errors.hpp"

namespace rwave::experiment {

// Shortest round-trip text; independent of locale.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    std::array<char, 64> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

class Cell {
public:
    Cell(double v) : text_(format_number(v)) {}
    Cell(std::string s) : text_(std::move(s)) {}
    Cell(const char* s) : text_(s) {}
    Cell(bool b) : text_(b ? "1" : "0") {}
    template <class I>
        requires(std::is_integral_v<I> && !std::is_same_v<I, bool>)
    Cell(I v) : text_(std::to_string(v)) {}
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

struct Table {
    std::string name;                  // file name, e.g. "tail.csv"
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string comment;               // optional first line, written as "# ..."

    void add(std::initializer_list<Cell> cells) {
        if (cells.size() != header.size()) throw Error("table " + name + ": row width differs from header");
        auto& r = rows.emplace_back();
        for (const auto& c : cells) r.push_back(c.text());
    }

    std::string render() const {
        std::string out;
        if (!comment.empty()) out += "# " + comment + "\n";
        auto line = [&](const std::vector<std::string>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ',';
                out += v[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

// Two-column x/y file for plotting; the comment names the statement probed.
inline Table plot_table(std::string name, std::string statement, std::string x, std::string y) {
    Table t;
    t.name = std::move(name);
    t.comment = std::move(statement);
    t.header = {std::move(x), std::move(y)};
    return t;
}

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + p.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error("write failed: " + p.string());
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error("cannot open " + p.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

} // namespace rwave::experiment
