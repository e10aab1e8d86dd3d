#include "gravnet/core/factor.hpp"

#include "gravnet/core/errors.hpp"

namespace gravnet {

FactorSpec parse_factor(std::string_view text) {
  std::string name(text);
  if (text == "origin" || text == "i" || text == "region") {
    return {name, FactorRule::origin_region, {}};
  }
  if (text == "destination" || text == "j") {
    return {name, FactorRule::destination_region, {}};
  }
  if (text == "country_pair") return {name, FactorRule::country_pair, {}};
  if (text == "origin_country" || text == "country") {
    return {name, FactorRule::origin_country, {}};
  }
  if (text == "destination_country") {
    return {name, FactorRule::destination_country, {}};
  }
  if (text == "pair") return {name, FactorRule::region_pair, {}};
  constexpr std::string_view kColumn = "column:";
  if (text.substr(0, kColumn.size()) == kColumn && text.size() > kColumn.size()) {
    return {name, FactorRule::custom_column, std::string(text.substr(kColumn.size()))};
  }
  throw ValidationError("unknown factor '" + name + "'");
}

}  // namespace gravnet
