#include "gsd/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gsd/error.hpp"

namespace gsd {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view cell, std::size_t row, std::size_t column) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
        throw ParseError("non-numeric cell '" + std::string(cell) + "'", row, column);
    }
    if (!std::isfinite(value)) throw ParseError("non-finite value", row, column);
    return value;
}

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        std::string_view view = trim(line);
        if (view.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const auto comma = view.find(',', start);
            cells.emplace_back(trim(view.substr(start, comma == std::string_view::npos
                                                           ? std::string_view::npos
                                                           : comma - start)));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw ParseError("empty CSV", 1, 1);
    return table;
}

GraphSignal read_signal_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    if (table.header.size() != 2 || table.header[0] != "node_id") {
        throw ParseError("signal CSV header must be `node_id,value`", 1, 1);
    }
    const std::size_t n = table.rows.size();
    GraphSignal signal;
    signal.units = table.header[1] == "value" ? "" : table.header[1];
    signal.values = Vector::Zero(static_cast<Eigen::Index>(n));
    std::vector<char> seen(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = r + 2;
        if (row.size() != 2) throw ParseError("expected 2 columns", line, row.size());
        const double id = parse_double(row[0], line, 1);
        if (id < 1 || id > static_cast<double>(n) || id != std::floor(id)) {
            throw ParseError("node_id must be an integer in [1, " + std::to_string(n) + "]", line, 1);
        }
        const auto k = static_cast<std::size_t>(id) - 1;
        if (seen[k]) throw ParseError("duplicate node_id", line, 1);
        seen[k] = 1;
        signal.values[static_cast<Eigen::Index>(k)] = parse_double(row[1], line, 2);
    }
    return signal;
}

GraphSignal read_signal_csv(const std::string& path) {
    auto in = open_input(path);
    return read_signal_csv(in);
}

void write_signal_csv(std::ostream& out, const Vector& values) {
    out << "node_id,value\n";
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        out << (k + 1) << ',' << format_double(values[k]) << '\n';
    }
}

void write_signal_csv(const std::string& path, const Vector& values) {
    auto out = open_output(path);
    write_signal_csv(out, values);
}

std::ofstream open_output(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw Error(ErrorKind::Usage, "cannot open '" + path + "' for writing");
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Usage, "cannot open '" + path + "' for reading");
    return in;
}

}  // namespace gsd
