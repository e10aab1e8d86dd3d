#include "gravnet/core/dyad_table.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"

namespace gravnet {

DyadTable::DyadTable(std::vector<std::string> measures)
    : measures_(std::move(measures)) {
  std::set<std::string> seen;
  for (const auto& m : measures_) {
    if (m.empty()) throw ValidationError("empty measure name");
    if (m == "i" || m == "j") {
      throw ValidationError("measure name '" + m + "' is reserved");
    }
    if (!seen.insert(m).second) {
      throw ValidationError("duplicate measure '" + m + "'");
    }
  }
}

std::optional<std::size_t> DyadTable::find_measure(std::string_view name) const {
  for (std::size_t k = 0; k < measures_.size(); ++k) {
    if (measures_[k] == name) return k;
  }
  return std::nullopt;
}

std::size_t DyadTable::measure_index(std::string_view name) const {
  if (auto k = find_measure(name)) return *k;
  throw ValidationError("dyad table has no measure '" + std::string(name) + "'");
}

void DyadTable::insert(const RegionId& i, const RegionId& j, Row values) {
  if (values.size() != measures_.size()) {
    throw ValidationError("row " + i.code() + "," + j.code() + " has " +
                          std::to_string(values.size()) + " values, expected " +
                          std::to_string(measures_.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v) && !is_missing(v)) {
      throw ValidationError("row " + i.code() + "," + j.code() +
                            ": non-finite measure value");
    }
  }
  auto [it, inserted] = rows_.emplace(DyadKey{i, j}, std::move(values));
  if (!inserted) {
    throw ValidationError("duplicate row for pair " + i.code() + "," + j.code());
  }
  regions_.insert(i);
  regions_.insert(j);
}

bool DyadTable::contains(const RegionId& i, const RegionId& j) const {
  return rows_.contains(DyadKey{i, j});
}

double DyadTable::value(const RegionId& i, const RegionId& j,
                        std::size_t measure) const {
  auto it = rows_.find(DyadKey{i, j});
  if (it == rows_.end()) return kMissing;
  return it->second.at(measure);
}

DyadTable DyadTable::parse_csv(std::istream& in, std::string source) {
  auto t = csv::parse(in, std::move(source));
  if (t.header.size() < 2 || t.header[0] != "i" || t.header[1] != "j") {
    throw ValidationError(t.source + ": dyad header must start with 'i,j'");
  }
  DyadTable table(std::vector<std::string>(t.header.begin() + 2, t.header.end()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& cells = t.rows[r];
    auto where = t.where(r);
    if (!RegionId::is_valid(cells[0]) || !RegionId::is_valid(cells[1])) {
      throw ValidationError(where + ": malformed region code in '" + cells[0] +
                            "," + cells[1] + "'");
    }
    Row values;
    values.reserve(cells.size() - 2);
    for (std::size_t c = 2; c < cells.size(); ++c) {
      values.push_back(csv::parse_number(cells[c], where));
    }
    try {
      table.insert(RegionId(cells[0]), RegionId(cells[1]), std::move(values));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return table;
}

DyadTable DyadTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_csv(in, path.string());
}

void DyadTable::write_csv(std::ostream& out) const {
  std::vector<std::string> cells{"i", "j"};
  cells.insert(cells.end(), measures_.begin(), measures_.end());
  csv::write_row(out, cells);
  for (const auto& [key, values] : rows_) {
    cells.assign({key.origin.code(), key.destination.code()});
    for (double v : values) cells.push_back(csv::format_number(v));
    csv::write_row(out, cells);
  }
}

void DyadTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(out);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

bool operator==(const DyadTable& a, const DyadTable& b) {
  if (a.measures_ != b.measures_ || a.regions_ != b.regions_ ||
      a.rows_.size() != b.rows_.size()) {
    return false;
  }
  auto ia = a.rows_.begin();
  auto ib = b.rows_.begin();
  for (; ia != a.rows_.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    for (std::size_t k = 0; k < ia->second.size(); ++k) {
      double x = ia->second[k];
      double y = ib->second[k];
      // Bitwise so that missing == missing and -0.0 != 0.0.
      if (std::memcmp(&x, &y, sizeof x) != 0 && !(is_missing(x) && is_missing(y))) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace gravnet
