#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rpveh/types.hpp"

namespace rpveh {

// Formats a double with 12 significant digits, locale-independent.
std::string format_double(double x);

// ---------------------------------------------------------------------------
// Rectangular grid dataset (axis1 x axis2 -> value), row-major in axis1.
// ---------------------------------------------------------------------------

struct GridData {
  std::vector<double> axis1;
  std::vector<double> axis2;
  std::vector<double> values;                 // values[i*axis2.size() + j]
  std::map<std::string, std::string> meta;    // emitted as "# key=value" lines

  double at(std::size_t i, std::size_t j) const {
    return values[i * axis2.size() + j];
  }

  struct ArgMax {
    std::size_t i, j;
    double value;
    bool unique;     // strictly greater than every other grid value
    bool interior;   // not on the grid boundary
  };
  ArgMax argmax() const;
};

// CSV with optional "# key=value" metadata lines, then the literal header
// "axis1,axis2,value", then one row per grid point, row-major.
void write_grid_csv(std::ostream& os, const GridData& grid);
void write_grid_csv_file(const std::string& path, const GridData& grid);
GridData read_grid_csv(std::istream& is);
GridData read_grid_csv_file(const std::string& path);

// ---------------------------------------------------------------------------
// Free-form column table (trace/summary/curve exports)
// ---------------------------------------------------------------------------

struct ColumnTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // one vector per header entry

  void validate() const;  // equal column lengths
};

void write_columns_csv(std::ostream& os, const ColumnTable& table);
void write_columns_csv_file(const std::string& path, const ColumnTable& table);

}  // namespace rpveh
