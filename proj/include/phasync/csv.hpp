#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "phasync/errors.hpp"

namespace phasync {

// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Column-major numeric table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }

  void add_column(std::string name, std::vector<double> values) {
    detail::require(columns.empty() || values.size() == rows(),
                    "CSV column '" + name + "' has the wrong length");
    header.push_back(std::move(name));
    columns.push_back(std::move(values));
  }
};

inline void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c)
    out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      out << (c ? "," : "") << format_double(table.columns[c][r]);
    out << '\n';
  }
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_csv(out, table);
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::string name = path.string();
  std::string line;
  if (!std::getline(in, line)) throw IoError("CSV '" + name + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvTable table;
  table.header = detail::split_csv_line(line);
  table.columns.resize(table.header.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != table.header.size())
      throw IoError("CSV '" + name + "' row " + std::to_string(row) + " has " +
                    std::to_string(cells.size()) + " fields, expected " +
                    std::to_string(table.header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto& s = cells[c];
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("CSV '" + name + "' row " + std::to_string(row) + ": '" + s +
                      "' is not a number");
      table.columns[c].push_back(v);
    }
  }
  return table;
}

}  // namespace phasync
