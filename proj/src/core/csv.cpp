#include "gravnet/core/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "gravnet/core/errors.hpp"

namespace gravnet::csv {

namespace {

std::vector<std::string> split_line(const std::string& line,
                                    const std::string& where) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cell.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted) throw ValidationError(where + ": unterminated quoted field");
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string s) {
  auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw ValidationError(source + ": missing column '" + std::string(name) +
                        "'");
}

bool Table::has_column(std::string_view name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

std::string Table::where(std::size_t row) const {
  return source + ":" + std::to_string(line_numbers.at(row));
}

Table parse(std::istream& in, std::string source) {
  Table t;
  t.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto where = t.source + ":" + std::to_string(line_no);
    auto cells = split_line(line, where);
    for (auto& c : cells) c = trim(std::move(c));
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ValidationError(where + ": expected " +
                            std::to_string(t.header.size()) + " fields, got " +
                            std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ValidationError(t.source + ": empty file (no header)");
  return t;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse(in, path.string());
}

double parse_number(std::string_view cell, std::string_view where) {
  if (cell.empty()) return kMissing;
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ValidationError(std::string(where) + ": not a finite number: '" +
                          std::string(cell) + "'");
  }
  return v;
}

std::string format_number(double v) {
  if (is_missing(v)) return {};
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string escape(std::string_view cell) {
  if (cell.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(cell);
  }
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (c) out << ',';
    out << escape(cells[c]);
  }
  out << '\n';
}

}  // namespace gravnet::csv
