#include "gravnet/ingest/panel.hpp"

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"

namespace gravnet::ingest {

std::map<int, DyadTable> split_years(const DyadTable& table, std::string_view prefix,
                                     std::string_view measure) {
  std::map<int, DyadTable> panel;
  const auto& names = table.measures();
  for (std::size_t m = 0; m < names.size(); ++m) {
    if (names[m].rfind(prefix, 0) != 0) continue;
    int year = 0;
    try {
      year = std::stoi(names[m].substr(prefix.size()));
    } catch (const std::exception&) {
      throw ValidationError("measure '" + names[m] + "' does not end in a year");
    }
    DyadTable t({std::string(measure)});
    for (const auto& r : table.regions()) t.add_region(r);
    for (const auto& [key, row] : table.rows()) {
      if (!is_missing(row[m])) t.insert(key, {row[m]});
    }
    panel.emplace(year, std::move(t));
  }
  return panel;
}

DyadTable most_recent_year(const std::map<int, DyadTable>& panel,
                           std::string_view measure, bool with_year) {
  std::vector<std::string> names{std::string(measure)};
  if (with_year) names.emplace_back("year");
  DyadTable out(names);

  std::map<DyadKey, DyadTable::Row> latest;
  // Ascending years: later years overwrite.
  for (const auto& [year, table] : panel) {
    const auto m = table.measure_index(measure);
    for (const auto& r : table.regions()) out.add_region(r);
    for (const auto& [key, row] : table.rows()) {
      if (is_missing(row[m])) continue;
      DyadTable::Row value{row[m]};
      if (with_year) value.push_back(static_cast<double>(year));
      latest[key] = std::move(value);
    }
  }
  for (auto& [key, row] : latest) out.insert(key, std::move(row));
  return out;
}

}  // namespace gravnet::ingest
