#pragma once

// Deterministic CSV output: shortest round-trip decimal form, '\n' endings,
// header row first.

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "expression.hpp"

namespace ucont {

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0) return "0";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

class CsvTable {
  public:
    using Cell = std::variant<double, long long, std::string>;

    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<Cell> row) {
        if (row.size() != header_.size()) throw Error("CSV row width does not match header");
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }

    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < header_.size(); ++i) s += (i ? "," : "") + header_[i];
        s += '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) s += ',';
                s += std::visit(
                    [](const auto& v) -> std::string {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<T, double>) return format_number(v);
                        else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
                        else return v;
                    },
                    r[i]);
            }
            s += '\n';
        }
        return s;
    }

    void write(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot open CSV for writing: " + path);
        const std::string s = str();
        os.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace ucont
