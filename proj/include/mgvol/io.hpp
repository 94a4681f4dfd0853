#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mgvol/geometry.hpp"

namespace mgvol {

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index by name; throws InputError when absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

/// Shortest text that reads back to the same double.
std::string format_number(double value);

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// Point data from a CSV with columns x, y, optional z, and `value`.
struct PointData {
  std::vector<Point> positions;
  std::vector<double> values;
  int dims = 2;
};
PointData read_samples(const std::string& path, const std::string& value_column = "value");

/// Grid map: ix,iy[,iz],x,y[,z] then one column per name.
CsvTable map_table(const Grid& grid, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns);

}  // namespace mgvol
