#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gnsfde/error.hpp"

namespace gnsfde::detail {

/// One CSV field, formatted deterministically.
struct Cell {
    std::string text;

    Cell(const std::string& s) : text(quote(s)) {}
    Cell(const char* s) : text(quote(s)) {}
    Cell(double v) : text(format(v)) {}
    Cell(std::size_t v) : text(std::to_string(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(bool v) : text(v ? "1" : "0") {}

    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return buf;
    }
    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
};

class CsvWriter {
public:
    /// Opens `path` and writes the `#` comment header lines followed by the column row.
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& comments,
              const std::vector<std::string>& columns)
        : out_(path, std::ios::binary) {
        if (!out_) throw config_error("cannot write " + path.string(), "out_dir");
        for (const auto& c : comments) out_ << "# " << c << '\n';
        row_text(columns);
    }

    void row(std::initializer_list<Cell> cells) {
        std::vector<std::string> t;
        for (const auto& c : cells) t.push_back(c.text);
        row_text(t);
    }
    void row(const std::vector<Cell>& cells) {
        std::vector<std::string> t;
        for (const auto& c : cells) t.push_back(c.text);
        row_text(t);
    }

private:
    void row_text(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
        out_ << '\n';
    }

    std::ofstream out_;
};

}  // namespace gnsfde::detail
