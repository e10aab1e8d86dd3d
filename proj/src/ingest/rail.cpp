#include "gravnet/ingest/rail.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"

namespace gravnet::ingest {

namespace {

std::string where(const RailReport& r) {
  return r.source_line ? "line " + std::to_string(r.source_line) + ": " : std::string{};
}

bool is_rail_year(int year) {
  return std::find(std::begin(kRailYears), std::end(kRailYears), year) !=
         std::end(kRailYears);
}

void check_report(const RailReport& r) {
  if (!is_missing(r.passengers) && r.passengers < 0.0) {
    throw ValidationError(where(r) + "negative passenger count for " +
                          r.i.code() + "," + r.j.code());
  }
  if (!is_rail_year(r.year)) {
    throw ValidationError(where(r) + "year " + std::to_string(r.year) +
                          " is not a reporting year (2005, 2010, 2015)");
  }
}

}  // namespace

const char* to_string(Scope s) {
  return s == Scope::domestic ? "domestic" : "international";
}

Scope scope_of(const RegionId& i, const RegionId& j) {
  return i.country() == j.country() ? Scope::domestic : Scope::international;
}

bool AvailabilityTable::available(const CountryId& reporter, int year,
                                  Scope scope) const {
  auto it = entries_.find(AvailabilityKey{reporter, year, scope});
  return it != entries_.end() && it->second;
}

void AvailabilityTable::write_csv(std::ostream& out) const {
  csv::write_row(out, {"reporter", "year", "scope", "available"});
  for (const auto& [key, ok] : entries_) {
    csv::write_row(out, {key.reporter, std::to_string(key.year),
                         to_string(key.scope), ok ? "1" : "0"});
  }
}

std::vector<RailReport> read_rail_csv(std::istream& in, std::string source) {
  auto t = csv::parse(in, std::move(source));
  const auto c_reporter = t.column("reporter");
  const auto c_year = t.column("year");
  const auto c_i = t.column("i");
  const auto c_j = t.column("j");
  const auto c_pass = t.column("passengers");

  std::vector<RailReport> reports;
  reports.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& cells = t.rows[r];
    auto at = t.where(r);
    const auto& reporter = cells[c_reporter];
    if (reporter.size() != 2 || !RegionId::is_valid(reporter)) {
      throw ValidationError(at + ": malformed reporter '" + reporter + "'");
    }
    for (auto c : {c_i, c_j}) {
      if (!RegionId::is_valid(cells[c])) {
        throw ValidationError(at + ": malformed region code '" + cells[c] + "'");
      }
    }
    double year = csv::parse_number(cells[c_year], at);
    if (is_missing(year) || year != static_cast<int>(year)) {
      throw ValidationError(at + ": year must be an integer");
    }
    RailReport rep{reporter, static_cast<int>(year), RegionId(cells[c_i]),
                   RegionId(cells[c_j]), csv::parse_number(cells[c_pass], at),
                   t.line_numbers[r]};
    try {
      RailReport unaddressed = rep;
      unaddressed.source_line = 0;
      check_report(unaddressed);
    } catch (const ValidationError& e) {
      throw ValidationError(at + ": " + e.what());
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::vector<RailReport> read_rail_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_rail_csv(in, path.string());
}

std::vector<RailReport> restrict_to_universe(std::span<const RailReport> reports,
                                             const std::set<RegionId>& universe) {
  // Countries represented by exactly one region of the universe.
  std::map<CountryId, std::vector<RegionId>> by_country;
  for (const auto& r : universe) by_country[r.country()].push_back(r);

  auto resolve = [&](const RegionId& code) -> std::optional<RegionId> {
    if (code.is_placeholder()) return std::nullopt;
    if (universe.contains(code)) return code;
    if (code.is_country_level()) {
      auto it = by_country.find(code.country());
      if (it != by_country.end() && it->second.size() == 1) return it->second.front();
    }
    return std::nullopt;
  };

  std::vector<RailReport> out;
  out.reserve(reports.size());
  for (const auto& rep : reports) {
    auto i = resolve(rep.i);
    auto j = resolve(rep.j);
    if (!i || !j) continue;
    RailReport kept = rep;
    kept.i = *i;
    kept.j = *j;
    if (kept.reporter != kept.i.country() && kept.reporter != kept.j.country()) {
      throw ValidationError(where(rep) + "reporter " + rep.reporter +
                            " is not an endpoint country of " + rep.i.code() +
                            "," + rep.j.code());
    }
    out.push_back(std::move(kept));
  }
  return out;
}

std::set<RegionId> regions_reported(std::span<const RailReport> reports, int year) {
  std::set<RegionId> out;
  for (const auto& rep : reports) {
    if (rep.year != year) continue;
    for (const auto* r : {&rep.i, &rep.j}) {
      if (!r->is_placeholder() && !r->is_country_level()) out.insert(*r);
    }
  }
  return out;
}

AvailabilityTable build_availability(std::span<const RailReport> reports) {
  AvailabilityTable table;
  for (const auto& rep : reports) {
    AvailabilityKey key{rep.reporter, rep.year, rep.scope()};
    bool has_value = !is_missing(rep.passengers);
    auto& entries = table.entries();
    auto it = entries.find(key);
    table.set(key, has_value || (it != entries.end() && it->second));
  }
  return table;
}

std::string passengers_measure(int year) {
  return "passengers_" + std::to_string(year);
}

DyadTable clean_rail(std::span<const RailReport> reports,
                     const AvailabilityTable& availability,
                     const std::set<RegionId>& universe) {
  for (const auto& rep : reports) check_report(rep);
  auto kept = restrict_to_universe(reports, universe);

  std::set<int> years;
  for (const auto& rep : reports) years.insert(rep.year);

  // year -> pair -> reporter -> passengers (missing already resolved to 0)
  std::map<int, std::map<DyadKey, std::map<CountryId, double>>> panel;
  for (const auto& rep : kept) {
    if (!availability.available(rep.reporter, rep.year, rep.scope())) continue;
    double v = is_missing(rep.passengers) ? 0.0 : rep.passengers;
    auto& by_reporter = panel[rep.year][DyadKey{rep.i, rep.j}];
    if (!by_reporter.emplace(rep.reporter, v).second) {
      throw ValidationError(where(rep) + "reporter " + rep.reporter +
                            " reports " + rep.i.code() + "," + rep.j.code() +
                            " more than once in " + std::to_string(rep.year));
    }
  }

  // Zero-fill pairs an available reporter did not list.
  for (int year : years) {
    auto& pairs = panel[year];
    for (const auto& a : universe) {
      for (const auto& b : universe) {
        if (a == b) continue;
        auto scope = scope_of(a, b);
        for (const auto& c : {a.country(), b.country()}) {
          if (!availability.available(c, year, scope)) continue;
          pairs[DyadKey{a, b}].emplace(c, 0.0);
        }
      }
    }
  }

  std::vector<std::string> measures;
  for (int year : years) measures.push_back(passengers_measure(year));
  DyadTable out(measures);
  for (const auto& r : universe) out.add_region(r);

  std::map<DyadKey, DyadTable::Row> rows;
  std::size_t col = 0;
  for (int year : years) {
    for (const auto& [key, by_reporter] : panel[year]) {
      if (by_reporter.empty()) continue;
      double sum = 0.0;
      for (const auto& [reporter, v] : by_reporter) sum += v;
      auto [it, fresh] = rows.try_emplace(key, measures.size(), kMissing);
      it->second[col] = sum / static_cast<double>(by_reporter.size());
    }
    ++col;
  }
  for (auto& [key, row] : rows) out.insert(key, std::move(row));
  return out;
}

std::vector<RailReport> reports_from_clean(const DyadTable& clean,
                                           const AvailabilityTable& availability) {
  std::vector<RailReport> out;
  const auto& measures = clean.measures();
  for (std::size_t m = 0; m < measures.size(); ++m) {
    const std::string prefix = "passengers_";
    if (measures[m].rfind(prefix, 0) != 0) {
      throw ValidationError("not a clean rail measure: '" + measures[m] + "'");
    }
    int year = std::stoi(measures[m].substr(prefix.size()));
    for (const auto& [key, row] : clean.rows()) {
      if (is_missing(row[m])) continue;
      auto scope = scope_of(key.origin, key.destination);
      std::vector<CountryId> reporters;
      for (const auto& c : {key.origin.country(), key.destination.country()}) {
        if (std::find(reporters.begin(), reporters.end(), c) == reporters.end() &&
            availability.available(c, year, scope)) {
          reporters.push_back(c);
        }
      }
      if (reporters.empty()) reporters.push_back(key.origin.country());
      for (const auto& c : reporters) {
        out.push_back(RailReport{c, year, key.origin, key.destination, row[m], 0});
      }
    }
  }
  return out;
}

}  // namespace gravnet::ingest
