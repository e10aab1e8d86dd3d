#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gravnet/regress/model_spec.hpp"

namespace gravnet::cli {

// One column of a comparison table: a model and the files it reads.
struct ColumnConfig {
  std::string name;
  std::optional<std::filesystem::path> data;        // dyadic CSV
  std::optional<std::filesystem::path> attributes;  // region CSV
  regress::ModelSpec spec;
};

struct FitConfig {
  std::string title;
  std::vector<ColumnConfig> columns;
};

// Plain-text model config:
//
//   # comment
//   title    = Rail travel and connectedness
//   family   = ppml                 (ols | ppml)
//   data     = rail.csv             (dyadic i,j,... table)
//   attributes = regions.csv        (region,... table)
//   outcome  = passengers
//   terms    = log(sci), log(distance_km)
//   deciles  = i:income, j:income
//   factors  = origin, destination
//   cluster  = origin, destination
//
//   [column (2)]
//   terms    = log(sci)
//
// Keys before the first section are defaults; each `[column <name>]`
// section overrides them. With no sections the defaults form a single
// column. Relative paths resolve against `base_dir`. Throws
// ValidationError with the line number for malformed input.
FitConfig parse_fit_config(std::istream& in, const std::string& source,
                           const std::filesystem::path& base_dir);
FitConfig read_fit_config(const std::filesystem::path& path);

}  // namespace gravnet::cli
