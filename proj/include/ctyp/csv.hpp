#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ctyp/errors.hpp"

namespace ctyp {

/// Round-trippable, locale-independent formatting used by every CSV emitter
/// so that repeated runs produce byte-identical files.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
        if (!out_) throw Error("cannot open " + path.string() + " for writing");
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }
    void header(const std::string& columns) { out_ << columns << "\n"; }

    template <typename... Ts>
    void row(Ts... fields) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, put(fields)), ...);
        out_ << "\n";
    }

  private:
    void put(double v) { out_ << format_double(v); }
    void put(int v) { out_ << v; }
    void put(std::size_t v) { out_ << v; }
    void put(const std::string& v) { out_ << v; }
    void put(const char* v) { out_ << v; }

    std::ofstream out_;
};

/// Minimal reader for the CSVs this project writes: '#' comment lines are
/// skipped, the first remaining line is the header, fields never contain
/// commas.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;
    double number(std::size_t row, int col) const;
};

CsvTable read_csv(const std::filesystem::path& path);

} // namespace ctyp
