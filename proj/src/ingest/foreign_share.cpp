#include "gravnet/ingest/foreign_share.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"

namespace gravnet::ingest {

std::map<RegionId, double> foreign_share(const SciMatrix& sci,
                                         const RegionTable& weights,
                                         std::string_view weight_attribute) {
  const auto& regions = sci.regions();
  const auto n = regions.size();
  std::vector<double> w(n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto* row = weights.find(regions[a]);
    double v = row ? row->get(weight_attribute) : kMissing;
    if (is_missing(v) || !(v > 0.0)) {
      throw ValidationError("foreign_share: region " + regions[a].code() +
                            " needs a positive '" + std::string(weight_attribute) +
                            "' weight");
    }
    w[a] = v;
  }

  std::map<RegionId, double> shares;
  for (std::size_t a = 0; a < n; ++a) {
    const double own = sci(a, a);
    if (is_missing(own)) {
      throw ValidationError("foreign_share: own-region SCI missing for " +
                            regions[a].code());
    }
    const auto home = regions[a].country();
    double foreign = 0.0;
    double total = own * w[a];
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      const double mass = sci(a, b) * w[b];
      total += mass;
      if (regions[b].country() != home) foreign += mass;
    }
    if (!(total > 0.0)) {
      throw ValidationError("foreign_share: zero connection mass for " +
                            regions[a].code());
    }
    shares.emplace(regions[a], std::clamp(100.0 * foreign / total, 0.0, 100.0));
  }
  return shares;
}

}  // namespace gravnet::ingest
