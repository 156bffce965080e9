// Minimal CSV reading and deterministic number formatting.
#ifndef FIRMFACTS_SRC_CSV_HPP
#define FIRMFACTS_SRC_CSV_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "firmfacts/errors.hpp"

namespace firmfacts::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Splits one record; double quotes group commas and "" escapes a quote.
inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  for (auto& cell : out) cell = std::string(trim(cell));
  return out;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

/// Empty cell -> nullopt; malformed -> SchemaError at `line`.
inline std::optional<double> parse_cell(std::string_view cell, std::size_t line, std::string_view column) {
  cell = trim(cell);
  if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
    throw SchemaError("column '" + std::string(column) + "': malformed number '" + std::string(cell) + "'", line);
  return v;
}

/// Shortest representation that round-trips; empty for NaN.
inline std::string fmt(double v) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

/// Reads all lines; `header` receives the first non-empty line split.
struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (1-based line, cells)

  int index_of(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  int require(std::string_view name) const {
    const int i = index_of(name);
    if (i < 0) throw SchemaError("missing header column '" + std::string(name) + "'", 1);
    return i;
  }
};

inline CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  CsvFile f;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (!have_header) {
      if (!cells.empty() && cells[0].size() >= 3 && cells[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
        cells[0].erase(0, 3);
      f.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != f.header.size())
      throw SchemaError("expected " + std::to_string(f.header.size()) + " fields, found " +
                            std::to_string(cells.size()),
                        lineno);
    f.rows.emplace_back(lineno, std::move(cells));
  }
  if (!have_header) throw SchemaError("empty file '" + path + "': missing header row", 1);
  return f;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

}  // namespace firmfacts::detail

#endif  // FIRMFACTS_SRC_CSV_HPP
