#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gravnet/core/dyad_table.hpp"
#include "gravnet/core/region_attributes.hpp"
#include "gravnet/regress/absorb.hpp"
#include "gravnet/regress/model_spec.hpp"

namespace gravnet::regress {

// Estimation data: dyadic rows (with optional endpoint attributes) or, when
// `dyads` is null, the rows of a region table.
struct DataSource {
  const DyadTable* dyads = nullptr;
  const RegionTable* regions = nullptr;
};

struct DesignMatrix {
  Family family = Family::ols;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;  // raw (unabsorbed) columns
  std::vector<std::string> column_names;
  // Absorbed factors. A model without factors absorbs a one-level
  // "(intercept)" factor instead.
  std::vector<FactorColumn> factors;
  std::vector<FactorColumn> clusters;
  std::vector<std::string> row_keys;  // "i,j" or region code
  std::size_t n_missing_deleted = 0;
  std::size_t n_dropped_by_fe = 0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(y.size()); }
  std::size_t n_total() const noexcept { return rows() + n_dropped_by_fe; }
};

// Builds y, X and the factor/cluster level ids.
//  - rows with a missing value in any referenced measure are deleted and
//    counted in n_missing_deleted;
//  - columns: continuous terms in spec order, then one indicator per
//    realized decile bucket 2..10 of each decile term (bucket 1 is the
//    reference);
//  - level ids are dense, in order of first appearance.
// Throws ValidationError for unknown measures or log of a non-positive
// value (naming rows), DegenerateModelError for an empty design, and
// CollinearityError naming columns that vanish after (unweighted)
// within-factor demeaning.
DesignMatrix build_design(const DataSource& data, const ModelSpec& spec);

// Rows with keep[r] true, with factor and cluster levels re-densified.
// Removed rows are added to n_dropped_by_fe.
DesignMatrix subset_rows(const DesignMatrix& dm, const std::vector<bool>& keep);

}  // namespace gravnet::regress
