#pragma once

#include <map>
#include <string_view>

#include "gravnet/core/region_attributes.hpp"
#include "gravnet/core/sci_matrix.hpp"

namespace gravnet::ingest {

// Percent of each region's connection mass that goes to regions in other
// countries. Mass between i and j is sci(i, j) * w_i * w_j, own-region mass
// sci(i, i) * w_i^2 counts toward the denominator only:
//
//   share_i = 100 * sum_{c(j) != c(i)} sci(i,j) w_j
//                 / (sum_{j != i} sci(i,j) w_j + sci(i,i) w_i)
//
// `weight_attribute` names the weight column (users or population) and must
// be positive for every SCI region. A missing diagonal is an error.
std::map<RegionId, double> foreign_share(const SciMatrix& sci,
                                         const RegionTable& weights,
                                         std::string_view weight_attribute);

}  // namespace gravnet::ingest
