#include "rpveh/table.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace rpveh {

std::string format_double(double x) {
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof(buf), x,
                           std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

GridData::ArgMax GridData::argmax() const {
  ArgMax best{0, 0, values.empty() ? 0.0 : values[0], true, false};
  const std::size_t n2 = axis2.size();
  for (std::size_t i = 0; i < axis1.size(); ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double v = at(i, j);
      if (v > best.value) {
        best = {i, j, v, true, false};
      } else if (v == best.value && (i != best.i || j != best.j)) {
        best.unique = false;
      }
    }
  }
  best.interior = best.i > 0 && best.i + 1 < axis1.size() && best.j > 0 &&
                  best.j + 1 < axis2.size();
  return best;
}

void write_grid_csv(std::ostream& os, const GridData& grid) {
  for (const auto& [k, v] : grid.meta) os << "# " << k << "=" << v << "\n";
  os << "axis1,axis2,value\n";
  const std::size_t n2 = grid.axis2.size();
  for (std::size_t i = 0; i < grid.axis1.size(); ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      os << format_double(grid.axis1[i]) << "," << format_double(grid.axis2[j])
         << "," << format_double(grid.at(i, j)) << "\n";
    }
  }
}

void write_grid_csv_file(const std::string& path, const GridData& grid) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  write_grid_csv(os, grid);
}

namespace {

double parse_double(const std::string& s, int line) {
  double v = 0;
  const char* b = s.data();
  auto res = std::from_chars(b, b + s.size(), v);
  if (res.ec != std::errc() || res.ptr != b + s.size())
    throw ConfigError("grid csv line " + std::to_string(line) +
                      ": bad number '" + s + "'");
  return v;
}

}  // namespace

GridData read_grid_csv(std::istream& is) {
  GridData grid;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  std::vector<std::array<double, 3>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        key.erase(key.find_last_not_of(' ') + 1);
        grid.meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    if (!header_seen) {
      if (line != "axis1,axis2,value")
        throw ConfigError("grid csv line " + std::to_string(lineno) +
                          ": expected header 'axis1,axis2,value'");
      header_seen = true;
      continue;
    }
    std::array<double, 3> row{};
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(ss, cell, ','))
        throw ConfigError("grid csv line " + std::to_string(lineno) +
                          ": expected 3 columns");
      row[k] = parse_double(cell, lineno);
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("grid csv: no data rows");

  // Recover the rectangular structure from row-major ordering: axis2 runs
  // until its first value repeats.
  for (const auto& r : rows) {
    if (!grid.axis2.empty() && r[1] == rows[0][1]) break;
    grid.axis2.push_back(r[1]);
  }
  if (grid.axis2.empty()) grid.axis2.push_back(rows[0][1]);
  const std::size_t n2 = grid.axis2.size();
  if (rows.size() % n2 != 0)
    throw ConfigError("grid csv: row count not a multiple of axis2 length");
  const std::size_t n1 = rows.size() / n2;
  grid.axis1.reserve(n1);
  grid.values.reserve(rows.size());
  for (std::size_t i = 0; i < n1; ++i) {
    grid.axis1.push_back(rows[i * n2][0]);
    for (std::size_t j = 0; j < n2; ++j) {
      const auto& r = rows[i * n2 + j];
      if (r[0] != grid.axis1[i] || r[1] != grid.axis2[j])
        throw ConfigError("grid csv: not a row-major rectangular grid");
      grid.values.push_back(r[2]);
    }
  }
  return grid;
}

GridData read_grid_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open: " + path);
  return read_grid_csv(is);
}

void ColumnTable::validate() const {
  if (header.size() != columns.size())
    throw ConfigError("column table: header/column count mismatch");
  for (const auto& c : columns)
    if (c.size() != columns.front().size())
      throw ConfigError("column table: ragged columns");
}

void write_columns_csv(std::ostream& os, const ColumnTable& table) {
  table.validate();
  for (std::size_t k = 0; k < table.header.size(); ++k)
    os << (k ? "," : "") << table.header[k];
  os << "\n";
  const std::size_t n = table.columns.empty() ? 0 : table.columns[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < table.columns.size(); ++k)
      os << (k ? "," : "") << format_double(table.columns[k][i]);
    os << "\n";
  }
}

void write_columns_csv_file(const std::string& path, const ColumnTable& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  write_columns_csv(os, table);
}

}  // namespace rpveh
