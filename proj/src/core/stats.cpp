#include "gravnet/core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"

namespace gravnet {

std::vector<int> decile_indicators(std::span<const double> values) {
  if (values.empty()) throw ValidationError("decile_indicators: empty input");
  for (double v : values) {
    if (std::isnan(v)) throw ValidationError("decile_indicators: NaN input");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<long long>(sorted.size());

  std::vector<int> buckets;
  buckets.reserve(values.size());
  for (double v : values) {
    auto below = static_cast<long long>(
        std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
    buckets.push_back(static_cast<int>((10 * below) / n) + 1);
  }
  return buckets;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("pearson: samples differ in length");
  }
  if (a.size() < 2) {
    throw ValidationError("pearson: need at least 2 paired observations");
  }
  // Welford co-moment updates.
  double mean_a = 0.0, mean_b = 0.0, m2_a = 0.0, m2_b = 0.0, co = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double n = static_cast<double>(k + 1);
    const double da = a[k] - mean_a;
    const double db = b[k] - mean_b;
    // Symmetric form of the co-moment update so that r(a, b) == r(b, a).
    const double shrink = (n - 1.0) / n;
    mean_a += da / n;
    mean_b += db / n;
    m2_a += da * da * shrink;
    m2_b += db * db * shrink;
    co += da * db * shrink;
  }
  if (!(m2_a > 0.0) || !(m2_b > 0.0)) {
    throw UndefinedCorrelationError("correlation undefined: zero variance");
  }
  return std::clamp(co / std::sqrt(m2_a * m2_b), -1.0, 1.0);
}

namespace {

std::map<DyadKey, double> unordered_values(const DyadTable& t,
                                           std::string_view measure) {
  const auto m = t.measure_index(measure);
  std::map<DyadKey, double> out;
  for (const auto& [key, row] : t.rows()) {
    if (key.origin == key.destination || is_missing(row[m])) continue;
    bool forward = key.origin < key.destination;
    DyadKey canon = forward ? key : DyadKey{key.destination, key.origin};
    if (forward) {
      out[canon] = row[m];
    } else {
      out.emplace(canon, row[m]);
    }
  }
  return out;
}

}  // namespace

double correlate_measures(const DyadTable& a, std::string_view measure_a,
                          const DyadTable& b, std::string_view measure_b) {
  auto va = unordered_values(a, measure_a);
  auto vb = unordered_values(b, measure_b);
  std::vector<double> xs, ys;
  for (const auto& [key, x] : va) {
    auto it = vb.find(key);
    if (it == vb.end()) continue;
    xs.push_back(x);
    ys.push_back(it->second);
  }
  if (xs.empty()) {
    throw ValidationError("correlate_measures: no shared pairs between '" +
                          std::string(measure_a) + "' and '" +
                          std::string(measure_b) + "'");
  }
  return pearson(xs, ys);
}

}  // namespace gravnet
