#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecim {

// Minimal CSV support for the files this library writes itself: a header
// line plus rows of comma-separated fields, no quoting or escapes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; `file` only feeds the error message.
  int column(const std::string& name, const std::string& file) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw std::runtime_error("csv: missing column '" + name + "' in " + file);
  }

  double number(std::size_t row, int col) const {
    return std::strtod(rows[row][static_cast<std::size_t>(col)].c_str(), nullptr);
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace ecim
