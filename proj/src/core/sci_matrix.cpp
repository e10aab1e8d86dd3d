#include "gravnet/core/sci_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"

namespace gravnet {

namespace {

constexpr std::size_t kMaxListedPairs = 10;

std::string list_pairs(const std::vector<std::string>& pairs) {
  std::ostringstream os;
  for (std::size_t k = 0; k < pairs.size() && k < kMaxListedPairs; ++k) {
    if (k) os << "; ";
    os << pairs[k];
  }
  if (pairs.size() > kMaxListedPairs) {
    os << "; ... (" << pairs.size() << " total)";
  }
  return os.str();
}

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

SciMatrix::SciMatrix(std::vector<RegionId> regions, Eigen::MatrixXd values)
    : regions_(std::move(regions)), values_(std::move(values)) {
  const auto n = static_cast<Eigen::Index>(regions_.size());
  if (values_.rows() != n || values_.cols() != n) {
    throw ValidationError("SCI matrix shape does not match region count");
  }
  std::set<RegionId> unique(regions_.begin(), regions_.end());
  if (unique.size() != regions_.size()) {
    throw ValidationError("SCI matrix has duplicate regions");
  }
  std::vector<std::string> asymmetric;
  std::vector<std::string> nonpositive;
  for (Eigen::Index a = 0; a < n; ++a) {
    double diag = values_(a, a);
    if (!is_missing(diag) && !(std::isfinite(diag) && diag > 0.0)) {
      nonpositive.push_back(regions_[a].code() + "," + regions_[a].code());
    }
    for (Eigen::Index b = a + 1; b < n; ++b) {
      double x = values_(a, b);
      double y = values_(b, a);
      auto pair = regions_[a].code() + "," + regions_[b].code();
      if (!(std::isfinite(x) && x > 0.0) || !(std::isfinite(y) && y > 0.0)) {
        nonpositive.push_back(pair);
      } else if (!nearly_equal(x, y)) {
        asymmetric.push_back(pair);
      }
    }
  }
  if (!nonpositive.empty()) {
    throw ValidationError("SCI must be strictly positive (and present) for every "
                          "pair; offending pairs: " + list_pairs(nonpositive));
  }
  if (!asymmetric.empty()) {
    throw ValidationError("SCI matrix is not symmetric; offending pairs: " +
                          list_pairs(asymmetric));
  }
}

SciMatrix SciMatrix::from_dyads(const DyadTable& table, std::string_view measure) {
  const auto m = table.measure_index(measure);
  std::vector<RegionId> regions(table.regions().begin(), table.regions().end());
  const auto n = static_cast<Eigen::Index>(regions.size());
  Eigen::MatrixXd values = Eigen::MatrixXd::Constant(n, n, kMissing);

  auto index = [&](const RegionId& r) {
    return static_cast<Eigen::Index>(
        std::lower_bound(regions.begin(), regions.end(), r) - regions.begin());
  };

  std::vector<std::string> asymmetric;
  for (const auto& [key, row] : table.rows()) {
    double v = row[m];
    if (is_missing(v)) continue;
    auto a = index(key.origin);
    auto b = index(key.destination);
    values(a, b) = v;
  }
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      double x = values(a, b);
      double y = values(b, a);
      if (is_missing(x)) {
        values(a, b) = y;
      } else if (is_missing(y)) {
        values(b, a) = x;
      } else if (!nearly_equal(x, y)) {
        asymmetric.push_back(regions[a].code() + "," + regions[b].code());
      }
    }
  }
  if (!asymmetric.empty()) {
    throw ValidationError("SCI matrix is not symmetric; offending pairs: " +
                          list_pairs(asymmetric));
  }
  return SciMatrix(std::move(regions), std::move(values));
}

std::optional<std::size_t> SciMatrix::index_of(const RegionId& r) const {
  auto it = std::find(regions_.begin(), regions_.end(), r);
  if (it == regions_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - regions_.begin());
}

}  // namespace gravnet
