#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <vector>

#include "gravnet/core/region.hpp"
#include "gravnet/core/sci_matrix.hpp"

namespace gravnet::cluster {

// Symmetric dissimilarities with a zero diagonal and strictly positive
// off-diagonal entries.
class DistanceMatrix {
 public:
  DistanceMatrix(std::vector<RegionId> regions, Eigen::MatrixXd d);

  const std::vector<RegionId>& regions() const noexcept { return regions_; }
  const Eigen::MatrixXd& values() const noexcept { return d_; }
  std::size_t size() const noexcept { return regions_.size(); }
  double operator()(std::size_t a, std::size_t b) const { return d_(a, b); }

 private:
  std::vector<RegionId> regions_;
  Eigen::MatrixXd d_;
};

// d(i, j) = 1 / sci(i, j) off the diagonal, 0 on it. The SCI diagonal is
// ignored. Throws ValidationError naming the first non-positive pair.
DistanceMatrix build_distance(const SciMatrix& sci);

// Cluster ids: leaves are 0..N-1 in region order; the cluster created by
// step s (0-based) is N + s. `left` is the side holding the
// lexicographically smaller region.
struct MergeStep {
  int left = 0;
  int right = 0;
  double height = 0.0;
  int new_id = 0;

  bool operator==(const MergeStep&) const = default;
};

class MergeTree {
 public:
  MergeTree(std::vector<RegionId> regions, std::vector<MergeStep> steps);

  const std::vector<RegionId>& regions() const noexcept { return regions_; }
  const std::vector<MergeStep>& steps() const noexcept { return steps_; }

  // Steps (0-based) whose height is below the previous step's. Average
  // linkage is monotone in exact arithmetic, so these only surface
  // rounding effects; they are reported, not rejected.
  std::vector<std::size_t> inversions() const;

  // `step,left,right,height,new_id`, step 1-based.
  void write_csv(std::ostream& out) const;
  // `id,region` for the leaves.
  void write_leaves_csv(std::ostream& out) const;

 private:
  std::vector<RegionId> regions_;
  std::vector<MergeStep> steps_;
};

// Size-weighted average linkage (UPGMA): each step merges the live pair
// (A, B) with the smallest mean cross-pair distance, updated with the
// Lance-Williams recurrence. Equal distances are resolved by the pair
// (smaller canonical region, larger canonical region), where a cluster's
// canonical region is its lexicographically smallest member. N >= 2.
MergeTree agglomerate(const DistanceMatrix& d);

class ClusterAssignment {
 public:
  ClusterAssignment(int k, std::map<RegionId, int> labels);

  int k() const noexcept { return k_; }
  const std::map<RegionId, int>& labels() const noexcept { return labels_; }
  int label(const RegionId& r) const;
  // Communities in label order.
  std::vector<std::set<RegionId>> communities() const;

  // `region,community`.
  void write_csv(std::ostream& out) const;

 private:
  int k_;
  std::map<RegionId, int> labels_;
};

// Undoes the last k-1 merges. Labels are canonical: communities ordered by
// their smallest region get 1..k. Throws ValidationError unless 1 <= k <= N.
ClusterAssignment cut(const MergeTree& tree, int k);

}  // namespace gravnet::cluster
