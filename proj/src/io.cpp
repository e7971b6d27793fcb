#include "sburg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sburg {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_series_csv(const std::string& path, const SeriesTable& table) {
  std::ofstream out(path, std::ios::binary);  // LF newlines everywhere
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const std::vector<double>& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::runtime_error("row width mismatch writing " + path);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
}

void write_series_json(const std::string& path, const SeriesTable& table) {
  nlohmann::json j;
  j["columns"] = table.columns;
  j["rows"] = table.rows;
  write_text_file(path, j.dump(2) + "\n");
}

std::string validate_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "cannot open " + path;
  std::string line;
  if (!std::getline(in, line)) return "empty file";
  std::size_t ncols = 1;
  for (char ch : line) ncols += (ch == ',');
  if (line.empty()) return "empty header";

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cells = 0;
    while (std::getline(ss, cell, ',')) {
      ++cells;
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &pos);
      } catch (...) {
        return "non-numeric cell '" + cell + "' at line " + std::to_string(lineno);
      }
      if (pos != cell.size())
        return "trailing junk in cell '" + cell + "' at line " + std::to_string(lineno);
      if (!std::isfinite(v))
        return "non-finite cell at line " + std::to_string(lineno);
    }
    if (cells != ncols)
      return "column count " + std::to_string(cells) + " != " +
             std::to_string(ncols) + " at line " + std::to_string(lineno);
  }
  return {};
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sburg
