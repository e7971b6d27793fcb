#pragma once

#include <string>
#include <vector>

namespace sburg {

/// One table of numeric series data: a header and fixed-width rows.
struct SeriesTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Write as CSV with a header row; cells use %.17g so re-reading round-trips
/// bit-exactly and reruns with the same config produce byte-identical files.
void write_series_csv(const std::string& path, const SeriesTable& table);

/// Write the same table as a JSON array-of-rows with a "columns" key.
void write_series_json(const std::string& path, const SeriesTable& table);

/// Check the CSV schema contract: one header row, fixed column count,
/// every cell a finite number. Returns an empty string when valid, else a
/// description of the first violation.
std::string validate_series_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string format_double(double v);

}  // namespace sburg
