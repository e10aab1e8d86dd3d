#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gravnet/core/region.hpp"

namespace gravnet {

// Named numeric attributes of one region. Missing attributes are kMissing.
struct RegionAttributes {
  RegionId region;
  std::map<std::string, double> attrs;

  double get(std::string_view name) const;  // kMissing when absent
};

// True for attributes whose values must be strictly positive when present.
bool is_positive_attribute(std::string_view name);
// True for percent-unit attributes, which must lie in [0, 100].
bool is_share_attribute(std::string_view name);

// Region-level table: header `region,<attr...>`.
class RegionTable {
 public:
  RegionTable() = default;
  explicit RegionTable(std::vector<std::string> attributes);

  const std::vector<std::string>& attributes() const noexcept { return names_; }
  bool has_attribute(std::string_view name) const;

  // Validates the positivity and share-range invariants.
  void insert(RegionAttributes row);

  const RegionAttributes* find(const RegionId& r) const;
  const std::map<RegionId, RegionAttributes>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

  static RegionTable parse_csv(std::istream& in, std::string source);
  static RegionTable read_csv(const std::filesystem::path& path);
  void write_csv(std::ostream& out) const;

 private:
  std::vector<std::string> names_;
  std::map<RegionId, RegionAttributes> rows_;
};

}  // namespace gravnet
