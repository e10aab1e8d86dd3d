#pragma once

#include <string>
#include <string_view>

namespace gravnet {

enum class FactorRule {
  origin_region,        // i (or the region itself in region-level data)
  destination_region,   // j
  country_pair,         // (country(i), country(j))
  origin_country,       // country(i) (or country(region))
  destination_country,  // country(j)
  region_pair,          // (i, j); the intersection dimension of i and j
  custom_column,        // value of a named measure/attribute, as a category
};

// A categorical grouping of rows: each row maps to exactly one level.
struct FactorSpec {
  std::string name;
  FactorRule rule = FactorRule::origin_region;
  std::string column;  // custom_column only

  bool operator==(const FactorSpec&) const = default;
};

// Accepts "origin" | "i" | "region", "destination" | "j", "country_pair",
// "origin_country" | "country", "destination_country", "pair", and
// "column:<name>". Throws ValidationError otherwise.
FactorSpec parse_factor(std::string_view text);

}  // namespace gravnet
