#pragma once

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace gravnet {

// Missing-value sentinel for measures. Distinct from zero; only the ingest
// rules are allowed to turn it into 0.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

namespace csv {

struct Table {
  std::string source;  // path or label used in error messages
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based, parallel to rows

  // Index of `name` in the header; throws ValidationError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  // "<source>:<line>" for row-addressed messages.
  std::string where(std::size_t row) const;
};

// Minimal RFC-4180 reader: comma separated, optional double quotes, CRLF
// tolerated, blank lines skipped. Every row must match the header width.
Table parse(std::istream& in, std::string source);
Table read(const std::filesystem::path& path);

// Empty cell -> kMissing. Anything else must parse completely as a finite
// double; otherwise ValidationError naming `where`.
double parse_number(std::string_view cell, std::string_view where);

// Shortest representation that parses back to the identical double.
// Missing values format as an empty cell.
std::string format_number(double v);

std::string escape(std::string_view cell);
void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace csv
}  // namespace gravnet
