#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gravnet/core/dyad_table.hpp"
#include "gravnet/core/region.hpp"

namespace gravnet::ingest {

enum class Scope { domestic, international };

const char* to_string(Scope s);
Scope scope_of(const RegionId& i, const RegionId& j);

// One raw row of the regional passenger-rail series as submitted by a
// reporting country. `passengers` is kMissing for "not available" and for
// confidential cells.
struct RailReport {
  CountryId reporter;
  int year = 0;
  RegionId i;
  RegionId j;
  double passengers = 0.0;
  std::size_t source_line = 0;  // 0 when not read from a file

  Scope scope() const { return scope_of(i, j); }
};

inline constexpr int kRailYears[] = {2005, 2010, 2015};

struct AvailabilityKey {
  CountryId reporter;
  int year = 0;
  Scope scope = Scope::domestic;

  auto operator<=>(const AvailabilityKey&) const = default;
};

// Whether a reporter submitted any data for a (year, scope) group.
class AvailabilityTable {
 public:
  void set(AvailabilityKey key, bool available) { entries_[std::move(key)] = available; }
  // Groups never seen are unavailable.
  bool available(const CountryId& reporter, int year, Scope scope) const;
  const std::map<AvailabilityKey, bool>& entries() const noexcept { return entries_; }

  // Long format `reporter,year,scope,available` with available in {0,1}.
  void write_csv(std::ostream& out) const;

 private:
  std::map<AvailabilityKey, bool> entries_;
};

// Reads `reporter,year,i,j,passengers`; empty passengers = missing. Row-
// addressed ValidationError on malformed codes, years outside
// {2005, 2010, 2015}, or negative counts.
std::vector<RailReport> read_rail_csv(std::istream& in, std::string source);
std::vector<RailReport> read_rail_csv(const std::filesystem::path& path);

// Drops XX/ZZ placeholder rows and country-level rows, except that a
// two-letter code is kept (as that region) when `universe` holds exactly
// one region of that country. Rows with an endpoint outside `universe` are
// dropped. Throws ValidationError when the reporter is not the country of
// either endpoint of a retained row.
std::vector<RailReport> restrict_to_universe(std::span<const RailReport> reports,
                                             const std::set<RegionId>& universe);

// NUTS2 regions (non-placeholder, longer than two characters) named by the
// reports of one year.
std::set<RegionId> regions_reported(std::span<const RailReport> reports, int year);

// A (reporter, year, scope) group is available iff at least one of its
// reports is non-missing.
AvailabilityTable build_availability(std::span<const RailReport> reports);

// Measure name used for `year` in clean_rail output.
std::string passengers_measure(int year);

// Cleans the reports into one `passengers_<year>` measure per year seen.
//  - reports are first passed through restrict_to_universe;
//  - inside an available group, missing values and pairs of the group
//    absent from the data become 0 (i != j pairs of `universe`);
//  - reports from unavailable groups are ignored;
//  - an international pair with reports from both endpoint countries gets
//    the arithmetic mean, with one report that value, with none it is
//    excluded (missing for that year).
// Throws ValidationError on negative counts, a reporter that is not an
// endpoint country, or the same reporter reporting a pair twice in a year.
DyadTable clean_rail(std::span<const RailReport> reports,
                     const AvailabilityTable& availability,
                     const std::set<RegionId>& universe);

// Re-expresses a clean table as reports from every available endpoint
// group, such that clean_rail(reports_from_clean(t, a), a, U) == t.
std::vector<RailReport> reports_from_clean(const DyadTable& clean,
                                           const AvailabilityTable& availability);

}  // namespace gravnet::ingest
