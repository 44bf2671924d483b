#include "parnoise/csv_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace parnoise {

std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_short(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

bool parse_number(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool is_missing(const std::string& cell) {
    std::string up = cell;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    return up.empty() || up == "NA" || up == "NAN" || up == "NULL";
}

bool is_index(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

IngestResult parse_csv(std::istream& in, const std::string& column, int period) {
    if (period < 1) {
        throw std::invalid_argument("period must be >= 1");
    }
    std::vector<double> values;
    std::string line;
    std::size_t row = 0;
    bool first_row = true;
    std::size_t width = 0;
    long col = is_index(column) ? std::stol(column) : -1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) {
            continue;
        }
        const std::vector<std::string> cells = split_row(line);
        if (first_row) {
            first_row = false;
            width = cells.size();
            if (col < 0) {
                const auto it = std::find(cells.begin(), cells.end(), column);
                if (it == cells.end()) {
                    throw std::runtime_error("column '" + column + "' not found in the header row");
                }
                col = it - cells.begin();
                continue;
            }
            double probe = 0.0;
            if (static_cast<std::size_t>(col) < cells.size() && !is_missing(cells[static_cast<std::size_t>(col)]) &&
                !parse_number(cells[static_cast<std::size_t>(col)], probe)) {
                continue;  // header row
            }
        }
        if (cells.size() != width) {
            throw std::runtime_error("row " + std::to_string(row) + ": expected " + std::to_string(width) +
                                     " field(s), found " + std::to_string(cells.size()));
        }
        if (static_cast<std::size_t>(col) >= cells.size()) {
            throw std::runtime_error("row " + std::to_string(row) + ": missing value (no column " +
                                     std::to_string(col) + ")");
        }
        const std::string& cell = cells[static_cast<std::size_t>(col)];
        if (is_missing(cell)) {
            throw std::runtime_error("row " + std::to_string(row) + ": missing value '" + cell + "'");
        }
        double value = 0.0;
        if (!parse_number(cell, value)) {
            throw std::runtime_error("row " + std::to_string(row) + ": unparseable value '" + cell + "'");
        }
        values.push_back(value);
    }

    const auto T = static_cast<std::size_t>(period);
    if (values.size() < 2 * T) {
        throw std::runtime_error("need at least 2*period = " + std::to_string(2 * T) + " observations, got " +
                                 std::to_string(values.size()));
    }
    IngestResult result;
    result.dropped = values.size() % T;
    if (result.dropped > 0) {
        values.resize(values.size() - result.dropped);
        result.warnings.push_back("dropped " + std::to_string(result.dropped) +
                                  " trailing observation(s) to make the length a multiple of the period");
    }
    result.trajectory.period = period;
    result.trajectory.n_cycles = values.size() / T;
    result.trajectory.values = std::move(values);
    return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const std::string& column, int period) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return parse_csv(in, column, period);
}

void write_series_csv(std::ostream& os, const std::vector<double>& values, const std::string& header) {
    os << header << '\n';
    for (double v : values) {
        os << format_full(v) << '\n';
    }
}

}  // namespace parnoise
