#pragma once

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace uavnoma::csv {

/// Shortest decimal that round-trips an IEEE double.
inline std::string number(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

/// Comma-joined row writer; call cell() repeatedly then end().
class RowWriter {
 public:
  explicit RowWriter(std::ostream& out) : out_(out) {}

  RowWriter& cell(std::string_view text) {
    if (!first_) out_ << ',';
    out_ << text;
    first_ = false;
    return *this;
  }
  RowWriter& cell(double v) { return cell(number(v)); }
  RowWriter& cell(long long v) { return cell(std::string_view(std::to_string(v))); }
  RowWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  RowWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }

  void end() {
    out_ << '\n';
    first_ = true;
  }

 private:
  std::ostream& out_;
  bool first_ = true;
};

inline void header(std::ostream& out, const std::vector<std::string>& columns) {
  RowWriter row(out);
  for (const auto& c : columns) row.cell(c);
  row.end();
}

/// Minimal reader for the numeric fixture/output files this project writes:
/// one header line, then comma-separated fields without quoting.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
  const std::string& text(std::size_t row, std::string_view name) const;
};

Table read_table(const std::string& path);

}  // namespace uavnoma::csv
