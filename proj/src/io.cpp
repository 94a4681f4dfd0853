#include "mgvol/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mgvol/error.hpp"

namespace mgvol {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  if (text.empty()) throw InputError(where + ": empty field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE)
    throw InputError(where + ": cannot parse '" + text + "' as a number");
  return v;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError("missing CSV column '" + name + "'");
  return std::size_t(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cells = split(line);
    if (table.header.empty()) {
      for (auto& c : cells) std::transform(c.begin(), c.end(), c.begin(), ::tolower);
      table.header = std::move(cells);
      continue;
    }
    const std::string where = path + ":" + std::to_string(line_no);
    if (cells.size() != table.header.size())
      throw InputError(where + ": expected " + std::to_string(table.header.size()) + " fields");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, where));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw InputError(path + " is empty");
  return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  if (!out) throw InputError("failed writing " + path);
}

PointData read_samples(const std::string& path, const std::string& value_column) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) throw InputError(path + " has no data rows");
  PointData data;
  const std::size_t cx = table.column("x"), cy = table.column("y");
  const std::size_t cv = table.column(value_column);
  const bool has_z = table.has_column("z");
  const std::size_t cz = has_z ? table.column("z") : 0;
  data.dims = has_z ? 3 : 2;
  for (const auto& row : table.rows) {
    data.positions.push_back({row[cx], row[cy], has_z ? row[cz] : 0.0});
    data.values.push_back(row[cv]);
  }
  return data;
}

CsvTable map_table(const Grid& grid, const std::vector<std::string>& names,
                   const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw InputError("map column names and data differ");
  for (const auto& c : columns)
    if (c.size() != grid.node_count()) throw InputError("map column length differs from grid");
  CsvTable table;
  const bool three = grid.dims == 3;
  table.header = three ? std::vector<std::string>{"ix", "iy", "iz", "x", "y", "z"}
                       : std::vector<std::string>{"ix", "iy", "x", "y"};
  table.header.insert(table.header.end(), names.begin(), names.end());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const auto cell = grid.cell(node);
    const Point p = grid.position(node);
    std::vector<double> row;
    if (three)
      row = {double(cell[0]), double(cell[1]), double(cell[2]), p[0], p[1], p[2]};
    else
      row = {double(cell[0]), double(cell[1]), p[0], p[1]};
    for (const auto& c : columns) row.push_back(c[node]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mgvol
