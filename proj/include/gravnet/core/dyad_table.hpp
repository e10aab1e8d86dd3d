#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gravnet/core/region.hpp"

namespace gravnet {

struct DyadKey {
  RegionId origin;
  RegionId destination;

  auto operator<=>(const DyadKey&) const = default;
  bool operator==(const DyadKey&) const = default;
};

// Keyed table of ordered region pairs carrying named numeric measures.
// At most one row per ordered pair; values are finite or kMissing; every
// endpoint is a member of regions(). Rows iterate in (origin, destination)
// order so all derived output is deterministic.
class DyadTable {
 public:
  using Row = std::vector<double>;

  DyadTable() = default;
  explicit DyadTable(std::vector<std::string> measures);

  const std::vector<std::string>& measures() const noexcept { return measures_; }
  std::optional<std::size_t> find_measure(std::string_view name) const;
  // Throws ValidationError naming the measure when absent.
  std::size_t measure_index(std::string_view name) const;

  const std::set<RegionId>& regions() const noexcept { return regions_; }
  void add_region(const RegionId& r) { regions_.insert(r); }

  // Throws ValidationError on a duplicate pair, width mismatch, or a
  // non-finite value other than kMissing.
  void insert(const RegionId& i, const RegionId& j, Row values);
  void insert(const DyadKey& key, Row values) {
    insert(key.origin, key.destination, std::move(values));
  }

  bool contains(const RegionId& i, const RegionId& j) const;
  // kMissing when the row is absent.
  double value(const RegionId& i, const RegionId& j, std::size_t measure) const;

  const std::map<DyadKey, Row>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  // Header `i,j,<measure...>`; empty cell = missing. Every region named in
  // a row joins the universe.
  static DyadTable parse_csv(std::istream& in, std::string source);
  static DyadTable read_csv(const std::filesystem::path& path);
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;

  friend bool operator==(const DyadTable& a, const DyadTable& b);

 private:
  std::vector<std::string> measures_;
  std::map<DyadKey, Row> rows_;
  std::set<RegionId> regions_;
};

bool operator==(const DyadTable& a, const DyadTable& b);

}  // namespace gravnet
