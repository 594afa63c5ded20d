#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tikdyn {

// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  // Throws kInvalidParameter for an unknown name.
  const std::vector<double>& Column(std::string_view name) const;
};

// Throws kIo if unreadable, kConfig on ragged rows or unparsable cells.
CsvTable ReadCsv(const std::string& path);

}  // namespace tikdyn
