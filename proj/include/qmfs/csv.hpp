#pragma once

// Minimal CSV output with shortest round-trip number formatting, so identical
// inputs always produce byte-identical files.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "qmfs/error.hpp"

namespace qmfs {

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    using Cell = std::variant<double, long long, std::string>;

    CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
        write_line(header);
    }

    void row(const std::vector<Cell>& cells) {
        if (cells.size() != columns_) throw Error("CSV row has " + std::to_string(cells.size()) + " cells, expected "
                                                  + std::to_string(columns_));
        std::vector<std::string> text;
        text.reserve(cells.size());
        for (const auto& c : cells) {
            if (const auto* d = std::get_if<double>(&c))
                text.push_back(format_double(*d));
            else if (const auto* i = std::get_if<long long>(&c))
                text.push_back(std::to_string(*i));
            else
                text.push_back(std::get<std::string>(c));
        }
        write_line(text);
    }

    void row(const std::vector<double>& values) {
        std::vector<Cell> cells(values.begin(), values.end());
        row(cells);
    }

private:
    void write_line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::ostream& out_;
    std::size_t columns_;
};

}  // namespace qmfs
