#include "emint/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace emint::csv {

std::string format(double x) {
    if (std::isnan(x)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

double parse(const std::string& cell) {
    if (cell.empty()) return std::nan("");
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) throw std::invalid_argument("unparsable CSV cell '" + cell + "'");
    return v;
}

void write(std::ostream& out, const Table& table) {
    for (const auto& c : table.comments) out << "# " << c << "\n";
    for (size_t i = 0; i < table.header.size(); ++i)
        out << table.header[i] << (i + 1 < table.header.size() ? "," : "");
    out << "\n";
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << format(row[i]) << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

}  // namespace

Table read(std::istream& in) {
    Table table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            size_t skip = 1;
            if (line.size() > 1 && line[1] == ' ') skip = 2;
            table.comments.push_back(line.substr(skip));
            continue;
        }
        if (!have_header) {
            table.header = split(line);
            have_header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& cell : split(line)) row.push_back(parse(cell));
        if (row.size() != table.header.size())
            throw std::invalid_argument("CSV row width " + std::to_string(row.size()) +
                                        " does not match header width " +
                                        std::to_string(table.header.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace emint::csv
