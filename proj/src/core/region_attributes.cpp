#include "gravnet/core/region_attributes.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"

namespace gravnet {

double RegionAttributes::get(std::string_view name) const {
  auto it = attrs.find(std::string(name));
  return it == attrs.end() ? kMissing : it->second;
}

bool is_positive_attribute(std::string_view name) {
  return name == "population" || name == "weight" || name == "users";
}

bool is_share_attribute(std::string_view name) {
  return name.find("share") != std::string_view::npos;
}

RegionTable::RegionTable(std::vector<std::string> attributes)
    : names_(std::move(attributes)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty() || n == "region") {
      throw ValidationError("invalid attribute name '" + n + "'");
    }
    if (!seen.insert(n).second) {
      throw ValidationError("duplicate attribute '" + n + "'");
    }
  }
}

bool RegionTable::has_attribute(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

void RegionTable::insert(RegionAttributes row) {
  for (const auto& [name, v] : row.attrs) {
    if (!has_attribute(name)) {
      throw ValidationError("region " + row.region.code() +
                            ": unknown attribute '" + name + "'");
    }
    if (is_missing(v)) continue;
    if (is_positive_attribute(name) && !(v > 0.0)) {
      throw ValidationError("region " + row.region.code() + ": " + name +
                            " must be strictly positive");
    }
    if (is_share_attribute(name) && (v < 0.0 || v > 100.0)) {
      throw ValidationError("region " + row.region.code() + ": " + name +
                            " must lie in [0, 100] (percent units)");
    }
  }
  auto region = row.region;
  if (!rows_.emplace(region, std::move(row)).second) {
    throw ValidationError("duplicate region " + region.code());
  }
}

const RegionAttributes* RegionTable::find(const RegionId& r) const {
  auto it = rows_.find(r);
  return it == rows_.end() ? nullptr : &it->second;
}

RegionTable RegionTable::parse_csv(std::istream& in, std::string source) {
  auto t = csv::parse(in, std::move(source));
  if (t.header.empty() || t.header[0] != "region") {
    throw ValidationError(t.source + ": region header must start with 'region'");
  }
  RegionTable table(std::vector<std::string>(t.header.begin() + 1, t.header.end()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& cells = t.rows[r];
    auto where = t.where(r);
    if (!RegionId::is_valid(cells[0])) {
      throw ValidationError(where + ": malformed region code '" + cells[0] + "'");
    }
    RegionAttributes row{RegionId(cells[0]), {}};
    for (std::size_t c = 1; c < cells.size(); ++c) {
      row.attrs[t.header[c]] = csv::parse_number(cells[c], where);
    }
    try {
      table.insert(std::move(row));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return table;
}

RegionTable RegionTable::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_csv(in, path.string());
}

void RegionTable::write_csv(std::ostream& out) const {
  std::vector<std::string> cells{"region"};
  cells.insert(cells.end(), names_.begin(), names_.end());
  csv::write_row(out, cells);
  for (const auto& [region, row] : rows_) {
    cells.assign({region.code()});
    for (const auto& n : names_) cells.push_back(csv::format_number(row.get(n)));
    csv::write_row(out, cells);
  }
}

}  // namespace gravnet
