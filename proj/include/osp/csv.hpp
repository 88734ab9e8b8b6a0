#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace osp {

// %.12g; NaN marks an unavailable value and is written as an empty cell.
std::string format_number(double v);

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws FormatError naming the column and the file.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace osp
