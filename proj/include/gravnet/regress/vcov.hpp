#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace gravnet::regress {

struct VcovResult {
  Eigen::MatrixXd vcov;  // symmetrized, PSD-repaired when needed
  Eigen::MatrixXd raw;   // symmetrized, before any repair
  bool psd_repaired = false;
  double min_eigenvalue = 0.0;  // of `raw`
  std::vector<int> n_clusters;  // per dimension (intersection not listed)
};

// Clustered sandwich B^-1 M B^-1 for per-row scores (n x k) and the bread
// B = X'WX (k x k).
//  - no dimension: every row is its own cluster (heteroskedasticity-robust);
//  - one dimension: M = c * sum_g s_g s_g', s_g the within-cluster score sum;
//  - two dimensions: M = M_1 + M_2 - M_12 (Cameron-Gelbach-Miller), M_12
//    clustering on the intersection of both ids.
// Each piece carries c = G/(G-1) * (n-1)/(n-k). A result with a negative
// eigenvalue is rebuilt with negatives truncated to 0 and flagged.
// Throws ValidationError for a dimension with a single cluster, more than
// two dimensions, or mismatched lengths.
VcovResult cluster_vcov(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& bread,
                        const std::vector<std::vector<int>>& cluster_ids);

// Clustered score outer-product sum with small-sample factor, for one
// dimension of dense ids. Exposed for diagnostics and tests.
Eigen::MatrixXd clustered_meat(const Eigen::MatrixXd& scores, std::span<const int> ids);

}  // namespace gravnet::regress
