#include "gravnet/ingest/crosswalk.hpp"

#include <cmath>
#include <fstream>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"

namespace gravnet::ingest {

Crosswalk::Crosswalk(std::vector<CrosswalkEntry> entries) {
  for (auto& e : entries) {
    if (!(e.population_share > 0.0 && e.population_share <= 1.0)) {
      throw ValidationError("crosswalk " + e.old_region.code() + "->" +
                            e.new_region.code() +
                            ": population share must lie in (0, 1]");
    }
    auto& targets = by_old_[e.old_region];
    for (const auto& t : targets) {
      if (t.new_region == e.new_region) {
        throw ValidationError("crosswalk maps " + e.old_region.code() + " to " +
                              e.new_region.code() + " twice");
      }
    }
    targets.push_back(std::move(e));
  }
  for (const auto& [old, targets] : by_old_) {
    double total = 0.0;
    for (const auto& t : targets) total += t.population_share;
    if (std::abs(total - 1.0) > 1e-9) {
      throw ValidationError("crosswalk shares for " + old.code() + " sum to " +
                            csv::format_number(total) + ", expected 1");
    }
  }
}

Crosswalk Crosswalk::identity(const std::set<RegionId>& regions) {
  std::vector<CrosswalkEntry> entries;
  for (const auto& r : regions) entries.push_back({r, r, 1.0});
  return Crosswalk(std::move(entries));
}

Crosswalk Crosswalk::parse_csv(std::istream& in, std::string source) {
  auto t = csv::parse(in, std::move(source));
  const auto c_old = t.column("old");
  const auto c_new = t.column("new");
  const auto c_share = t.column("population_share");
  std::vector<CrosswalkEntry> entries;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& cells = t.rows[r];
    auto at = t.where(r);
    for (auto c : {c_old, c_new}) {
      if (!RegionId::is_valid(cells[c])) {
        throw ValidationError(at + ": malformed region code '" + cells[c] + "'");
      }
    }
    double share = csv::parse_number(cells[c_share], at);
    if (is_missing(share)) throw ValidationError(at + ": missing population_share");
    entries.push_back({RegionId(cells[c_old]), RegionId(cells[c_new]), share});
  }
  try {
    return Crosswalk(std::move(entries));
  } catch (const ValidationError& e) {
    throw ValidationError(t.source + ": " + e.what());
  }
}

Crosswalk Crosswalk::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_csv(in, path.string());
}

Crosswalk Crosswalk::with_identity_for(const std::set<RegionId>& regions) const {
  Crosswalk out = *this;
  for (const auto& r : regions) {
    if (!out.by_old_.contains(r)) out.by_old_[r].push_back({r, r, 1.0});
  }
  return out;
}

const std::vector<CrosswalkEntry>* Crosswalk::targets(const RegionId& old_region) const {
  auto it = by_old_.find(old_region);
  return it == by_old_.end() ? nullptr : &it->second;
}

DyadTable apply_crosswalk(const DyadTable& flows, const Crosswalk& cw) {
  std::set<RegionId> unmapped;
  for (const auto& [key, row] : flows.rows()) {
    if (!cw.targets(key.origin)) unmapped.insert(key.origin);
    if (!cw.targets(key.destination)) unmapped.insert(key.destination);
  }
  if (!unmapped.empty()) {
    std::string codes;
    for (const auto& r : unmapped) codes += (codes.empty() ? "" : ", ") + r.code();
    throw ValidationError("crosswalk does not map region(s): " + codes);
  }

  const auto width = flows.measures().size();
  std::map<DyadKey, DyadTable::Row> acc;
  for (const auto& [key, row] : flows.rows()) {
    for (const auto& a : *cw.targets(key.origin)) {
      for (const auto& b : *cw.targets(key.destination)) {
        const double share = a.population_share * b.population_share;
        auto [it, fresh] = acc.try_emplace(DyadKey{a.new_region, b.new_region},
                                           width, kMissing);
        for (std::size_t m = 0; m < width; ++m) {
          if (is_missing(row[m])) continue;
          double& cell = it->second[m];
          cell = (is_missing(cell) ? 0.0 : cell) + row[m] * share;
        }
      }
    }
  }

  DyadTable out(flows.measures());
  for (const auto& r : flows.regions()) {
    if (const auto* targets = cw.targets(r)) {
      for (const auto& t : *targets) out.add_region(t.new_region);
    }
  }
  for (auto& [key, row] : acc) out.insert(key, std::move(row));
  return out;
}

}  // namespace gravnet::ingest
