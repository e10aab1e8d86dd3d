#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <vector>

#include "gravnet/core/dyad_table.hpp"
#include "gravnet/core/region.hpp"

namespace gravnet {

// Dense symmetric social-connectedness matrix. Off-diagonal entries are
// strictly positive; the diagonal (own-region connectedness) may be
// kMissing when the source does not carry it.
class SciMatrix {
 public:
  // Throws ValidationError on duplicate regions, shape mismatch, asymmetry
  // (relative tolerance 1e-12), or a non-positive / missing off-diagonal.
  SciMatrix(std::vector<RegionId> regions, Eigen::MatrixXd values);

  // Builds from a long-format table (`i,j,<measure>`). A pair given in only
  // one direction is mirrored; a pair given in both directions must agree.
  // Regions are ordered lexicographically. Errors name offending pairs.
  static SciMatrix from_dyads(const DyadTable& table, std::string_view measure);

  const std::vector<RegionId>& regions() const noexcept { return regions_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return regions_.size(); }
  std::optional<std::size_t> index_of(const RegionId& r) const;

  double operator()(std::size_t a, std::size_t b) const { return values_(a, b); }

 private:
  std::vector<RegionId> regions_;
  Eigen::MatrixXd values_;
};

}  // namespace gravnet
