#pragma once

#include <map>
#include <string>
#include <string_view>

#include "gravnet/core/dyad_table.hpp"

namespace gravnet::ingest {

// Splits a table with `<prefix><year>` measures into per-year tables that
// each carry a single measure named `measure`. Rows missing in a year are
// left out of that year's table.
std::map<int, DyadTable> split_years(const DyadTable& table, std::string_view prefix,
                                     std::string_view measure);

// Per pair, the `measure` value from the latest year in which it is
// present and non-missing; pairs missing in every year are absent. With
// `with_year`, a `year` measure records the source year.
DyadTable most_recent_year(const std::map<int, DyadTable>& panel,
                           std::string_view measure, bool with_year = false);

}  // namespace gravnet::ingest
