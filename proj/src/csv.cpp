#include "osp/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "osp/errors.hpp"

namespace osp {

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw FormatError(source + ": missing column '" + name + "'");
}

const std::string& CsvTable::text(std::size_t row, const std::string& name) const {
  return rows.at(row)[column(name)];
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& cell = text(row, name);
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [p, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw FormatError(source + ": line " + std::to_string(row + 2) + ": column '" + name +
                      "' is not a number: '" + cell + "'");
  return v;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  CsvTable t;
  t.source = path.string();
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(l);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw FormatError(t.source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw FormatError(t.source + ": line " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace osp
