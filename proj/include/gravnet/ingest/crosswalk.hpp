#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gravnet/core/dyad_table.hpp"
#include "gravnet/core/region.hpp"

namespace gravnet::ingest {

struct CrosswalkEntry {
  RegionId old_region;
  RegionId new_region;
  double population_share = 1.0;
};

// Old-to-new region mapping. Each old region's shares lie in (0, 1] and
// sum to 1 within 1e-9.
class Crosswalk {
 public:
  Crosswalk() = default;
  explicit Crosswalk(std::vector<CrosswalkEntry> entries);

  static Crosswalk identity(const std::set<RegionId>& regions);
  // Header `old,new,population_share`.
  static Crosswalk parse_csv(std::istream& in, std::string source);
  static Crosswalk read_csv(const std::filesystem::path& path);

  // Adds identity mappings for `regions` not already mapped.
  Crosswalk with_identity_for(const std::set<RegionId>& regions) const;

  const std::vector<CrosswalkEntry>* targets(const RegionId& old_region) const;
  const std::map<RegionId, std::vector<CrosswalkEntry>>& entries() const noexcept {
    return by_old_;
  }

 private:
  std::map<RegionId, std::vector<CrosswalkEntry>> by_old_;
};

// Each row (a, b, v) contributes v * share(a -> a') * share(b -> b') to
// (a', b'), summed over contributing rows, per measure. A cell is missing
// only when every contribution is missing. Throws ValidationError listing
// the row endpoints the crosswalk does not map.
DyadTable apply_crosswalk(const DyadTable& flows, const Crosswalk& cw);

}  // namespace gravnet::ingest
