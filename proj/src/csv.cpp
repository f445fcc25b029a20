#include "uavnoma/csv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uavnoma::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("csv: no column named '" + std::string(name) + "'");
}

double Table::number(std::size_t row, std::string_view name) const {
  return std::stod(text(row, name));
}

const std::string& Table::text(std::size_t row, std::string_view name) const {
  return rows.at(row).at(column(name));
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      t.columns = split(line);
      have_header = true;
      continue;
    }
    auto fields = split(line);
    if (fields.size() != t.columns.size()) {
      throw std::runtime_error("csv: ragged row in " + path + ": " + line);
    }
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) throw std::runtime_error("csv: empty file " + path);
  return t;
}

}  // namespace uavnoma::csv
