#include "ctyp/csv.hpp"

#include <cstdlib>
#include <sstream>

namespace ctyp {

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw Error("csv column not found: " + name);
}

double CsvTable::number(std::size_t row, int col) const {
    return std::strtod(rows.at(row).at(static_cast<std::size_t>(col)).c_str(), nullptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

} // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            table.columns = split_line(line);
            have_header = true;
        } else {
            table.rows.push_back(split_line(line));
        }
    }
    return table;
}

} // namespace ctyp
