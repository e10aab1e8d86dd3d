#include "gravnet/cluster/hierarchical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <tuple>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"

namespace gravnet::cluster {

DistanceMatrix::DistanceMatrix(std::vector<RegionId> regions, Eigen::MatrixXd d)
    : regions_(std::move(regions)), d_(std::move(d)) {
  const auto n = static_cast<Eigen::Index>(regions_.size());
  if (d_.rows() != n || d_.cols() != n) {
    throw ValidationError("distance matrix shape does not match region count");
  }
  for (Eigen::Index a = 0; a < n; ++a) {
    if (d_(a, a) != 0.0) {
      throw ValidationError("distance matrix diagonal must be 0 at " +
                            regions_[a].code());
    }
    for (Eigen::Index b = a + 1; b < n; ++b) {
      if (!(std::isfinite(d_(a, b)) && d_(a, b) > 0.0) || d_(a, b) != d_(b, a)) {
        throw ValidationError("distance between " + regions_[a].code() + " and " +
                              regions_[b].code() +
                              " must be symmetric and strictly positive");
      }
    }
  }
}

DistanceMatrix build_distance(const SciMatrix& sci) {
  const auto n = static_cast<Eigen::Index>(sci.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (a == b) continue;
      double s = sci(a, b);
      if (!(std::isfinite(s) && s > 0.0)) {
        throw ValidationError("SCI between " + sci.regions()[a].code() + " and " +
                              sci.regions()[b].code() + " must be positive");
      }
      d(a, b) = 1.0 / s;
    }
  }
  // Symmetrize bitwise: SciMatrix admits 1e-12 relative asymmetry.
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) d(b, a) = d(a, b);
  }
  return DistanceMatrix(sci.regions(), std::move(d));
}

MergeTree::MergeTree(std::vector<RegionId> regions, std::vector<MergeStep> steps)
    : regions_(std::move(regions)), steps_(std::move(steps)) {
  if (regions_.size() < 1 || steps_.size() != regions_.size() - 1) {
    throw ValidationError("merge tree over N regions needs exactly N-1 steps");
  }
}

std::vector<std::size_t> MergeTree::inversions() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 1; s < steps_.size(); ++s) {
    if (steps_[s].height < steps_[s - 1].height) out.push_back(s);
  }
  return out;
}

void MergeTree::write_csv(std::ostream& out) const {
  csv::write_row(out, {"step", "left", "right", "height", "new_id"});
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    const auto& st = steps_[s];
    csv::write_row(out, {std::to_string(s + 1), std::to_string(st.left),
                         std::to_string(st.right), csv::format_number(st.height),
                         std::to_string(st.new_id)});
  }
}

void MergeTree::write_leaves_csv(std::ostream& out) const {
  csv::write_row(out, {"id", "region"});
  for (std::size_t k = 0; k < regions_.size(); ++k) {
    csv::write_row(out, {std::to_string(k), regions_[k].code()});
  }
}

namespace {

// Ordering key of a candidate merge: distance, then the canonical-region
// ranks of the two sides (smaller first).
struct PairKey {
  double distance;
  int lo;
  int hi;

  bool operator<(const PairKey& o) const {
    return std::tie(distance, lo, hi) < std::tie(o.distance, o.lo, o.hi);
  }
};

}  // namespace

MergeTree agglomerate(const DistanceMatrix& dm) {
  const int n = static_cast<int>(dm.size());
  if (n < 2) throw ValidationError("agglomerate needs at least 2 regions");

  // Lexicographic rank of each leaf's region.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return dm.regions()[a] < dm.regions()[b]; });
  std::vector<int> rank(n);
  for (int r = 0; r < n; ++r) rank[order[r]] = r;

  // Slot state. A merged cluster lives in the slot of its left side.
  Eigen::MatrixXd d = dm.values();
  std::vector<bool> live(n, true);
  std::vector<double> size(n, 1.0);
  std::vector<int> canon = rank;
  std::vector<int> id(n);
  std::iota(id.begin(), id.end(), 0);

  auto key = [&](int s, int t) {
    return PairKey{d(s, t), std::min(canon[s], canon[t]), std::max(canon[s], canon[t])};
  };

  std::vector<int> nn(n, -1);
  auto rescan = [&](int s) {
    nn[s] = -1;
    for (int t = 0; t < n; ++t) {
      if (t == s || !live[t]) continue;
      if (nn[s] < 0 || key(s, t) < key(s, nn[s])) nn[s] = t;
    }
  };
  for (int s = 0; s < n; ++s) rescan(s);

  std::vector<MergeStep> steps;
  steps.reserve(n - 1);
  for (int step = 0; step < n - 1; ++step) {
    int best = -1;
    for (int s = 0; s < n; ++s) {
      if (!live[s]) continue;
      if (best < 0 || key(s, nn[s]) < key(best, nn[best])) best = s;
    }
    int a = best;
    int b = nn[best];
    if (canon[b] < canon[a]) std::swap(a, b);

    const double height = d(a, b);
    steps.push_back({id[a], id[b], height, n + step});

    // Lance-Williams update for average linkage.
    const double sa = size[a];
    const double sb = size[b];
    for (int c = 0; c < n; ++c) {
      if (!live[c] || c == a || c == b) continue;
      double v = (sa * d(a, c) + sb * d(b, c)) / (sa + sb);
      d(a, c) = v;
      d(c, a) = v;
    }
    live[b] = false;
    size[a] = sa + sb;
    canon[a] = std::min(canon[a], canon[b]);
    id[a] = n + step;

    if (step == n - 2) break;
    for (int c = 0; c < n; ++c) {
      if (!live[c] || c == a) continue;
      if (nn[c] == a || nn[c] == b) {
        rescan(c);
      } else if (key(c, a) < key(c, nn[c])) {
        nn[c] = a;
      }
    }
    rescan(a);
  }
  return MergeTree(dm.regions(), std::move(steps));
}

ClusterAssignment::ClusterAssignment(int k, std::map<RegionId, int> labels)
    : k_(k), labels_(std::move(labels)) {
  std::set<int> used;
  for (const auto& [r, l] : labels_) {
    if (l < 1 || l > k_) throw ValidationError("community label out of range");
    used.insert(l);
  }
  if (static_cast<int>(used.size()) != k_) {
    throw ValidationError("assignment does not have exactly k nonempty communities");
  }
}

int ClusterAssignment::label(const RegionId& r) const {
  auto it = labels_.find(r);
  if (it == labels_.end()) throw ValidationError("region " + r.code() + " not assigned");
  return it->second;
}

std::vector<std::set<RegionId>> ClusterAssignment::communities() const {
  std::vector<std::set<RegionId>> out(k_);
  for (const auto& [r, l] : labels_) out[l - 1].insert(r);
  return out;
}

void ClusterAssignment::write_csv(std::ostream& out) const {
  csv::write_row(out, {"region", "community"});
  for (const auto& [r, l] : labels_) csv::write_row(out, {r.code(), std::to_string(l)});
}

ClusterAssignment cut(const MergeTree& tree, int k) {
  const int n = static_cast<int>(tree.regions().size());
  if (k < 1 || k > n) {
    throw ValidationError("cut level k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  // Union-find over cluster ids 0..2N-2.
  std::vector<int> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int s = 0; s < n - k; ++s) {
    const auto& st = tree.steps()[s];
    parent[find(st.left)] = st.new_id;
    parent[find(st.right)] = st.new_id;
  }

  // Canonical labels: first appearance in lexicographic region order.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto& regions = tree.regions();
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return regions[a] < regions[b]; });
  std::map<int, int> label_of_root;
  std::map<RegionId, int> labels;
  for (int leaf : order) {
    int root = find(leaf);
    auto [it, fresh] =
        label_of_root.try_emplace(root, static_cast<int>(label_of_root.size()) + 1);
    labels.emplace(regions[leaf], it->second);
  }
  return ClusterAssignment(k, std::move(labels));
}

}  // namespace gravnet::cluster
