#include "tikdyn/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tikdyn/error.hpp"

namespace tikdyn {
namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double ParseCell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    Throw(ErrorCode::kConfig, fmt::format("row {}, column {}: '{}' is not a number", row, col, cell));
  }
  return v;
}

}  // namespace

const std::vector<double>& CsvTable::Column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return columns[i];
  }
  Throw(ErrorCode::kInvalidParameter, fmt::format("no column named '{}'", name));
}

CsvTable ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Throw(ErrorCode::kIo, "cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) Throw(ErrorCode::kConfig, path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = SplitLine(line);
  table.columns.resize(table.header.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = SplitLine(line);
    if (cells.size() != table.header.size()) {
      Throw(ErrorCode::kConfig, fmt::format("{}: row {} has {} cells, header has {}", path, row,
                                            cells.size(), table.header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      table.columns[c].push_back(ParseCell(cells[c], row, c + 1));
    }
  }
  return table;
}

}  // namespace tikdyn
