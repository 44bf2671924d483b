#pragma once

#include "parnoise/simulate.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace parnoise {

/// 17 significant digits: parsing the text gives back the same double.
[[nodiscard]] std::string format_full(double x);
/// 4 significant digits, for human-readable tables.
[[nodiscard]] std::string format_short(double x);

struct IngestResult {
    Trajectory trajectory;
    std::size_t dropped = 0;
    std::vector<std::string> warnings;
};

/**
 * @brief Reads one numeric column of a comma-separated file.
 *
 * `column` is a 0-based index or a header name. A first row whose selected cell is
 * not numeric is treated as the header. The tail is truncated to a multiple of
 * `period` (with a warning). Missing or unparseable cells throw
 * std::runtime_error naming the 1-based file row.
 */
[[nodiscard]] IngestResult ingest_csv(const std::filesystem::path& path, const std::string& column, int period);
[[nodiscard]] IngestResult parse_csv(std::istream& in, const std::string& column, int period);

/// Single-column CSV with a header row and full-precision values.
void write_series_csv(std::ostream& os, const std::vector<double>& values, const std::string& header = "value");

}  // namespace parnoise
