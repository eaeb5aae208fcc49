#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gsd/graph.hpp"

namespace gsd {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a whole cell as a finite double; throws ParseError otherwise.
double parse_double(std::string_view cell, std::size_t row, std::size_t column);

/// Minimal CSV reader for the numeric tables used here (no quoting).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);

/// Signal CSV: header `node_id,value`, rows in any order, node ids 1..N each
/// present exactly once.
GraphSignal read_signal_csv(std::istream& in);
GraphSignal read_signal_csv(const std::string& path);
void write_signal_csv(std::ostream& out, const Vector& values);
void write_signal_csv(const std::string& path, const Vector& values);

/// Opens `path` for writing, creating parent directories; throws on failure.
std::ofstream open_output(const std::string& path);
std::ifstream open_input(const std::string& path);

}  // namespace gsd
