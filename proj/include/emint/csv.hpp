#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emint::csv {

/// 17-significant-digit rendering; round-trips doubles exactly. NaN
/// renders as the empty cell.
std::string format(double x);

/// Inverse of format; the empty cell parses to NaN.
double parse(const std::string& cell);

struct Table {
    std::vector<std::string> comments;  // leading '#' lines, without the marker
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Comma-separated, header row first after comments, '.' decimal point.
void write(std::ostream& out, const Table& table);

/// Reads what write produces (and any CSV of numeric cells with '#'
/// comment lines).
Table read(std::istream& in);

}  // namespace emint::csv
