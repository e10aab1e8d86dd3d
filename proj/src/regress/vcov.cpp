#include "gravnet/regress/vcov.hpp"

#include <map>
#include <numeric>
#include <utility>

#include "gravnet/core/errors.hpp"

namespace gravnet::regress {

namespace {

int count_clusters(std::span<const int> ids) {
  int max_id = -1;
  for (int g : ids) {
    if (g < 0) throw ValidationError("negative cluster id");
    max_id = std::max(max_id, g);
  }
  std::vector<bool> seen(static_cast<std::size_t>(max_id + 1), false);
  int count = 0;
  for (int g : ids) {
    if (!seen[g]) {
      seen[g] = true;
      ++count;
    }
  }
  return count;
}

}  // namespace

Eigen::MatrixXd clustered_meat(const Eigen::MatrixXd& scores, std::span<const int> ids) {
  const auto n = scores.rows();
  const auto k = scores.cols();
  if (static_cast<Eigen::Index>(ids.size()) != n) {
    throw ValidationError("cluster ids do not match score rows");
  }
  const int groups = count_clusters(ids);
  if (groups < 2) {
    throw ValidationError("cluster dimension has a single cluster");
  }
  if (n <= k) throw ValidationError("too few observations for clustered variance");

  int max_id = 0;
  for (int g : ids) max_id = std::max(max_id, g);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(max_id + 1, k);
  for (Eigen::Index r = 0; r < n; ++r) sums.row(ids[r]) += scores.row(r);

  const double g = groups;
  const double correction = g / (g - 1.0) * static_cast<double>(n - 1) /
                            static_cast<double>(n - k);
  return correction * (sums.transpose() * sums);
}

VcovResult cluster_vcov(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& bread,
                        const std::vector<std::vector<int>>& cluster_ids) {
  const auto n = scores.rows();
  const auto k = scores.cols();
  if (bread.rows() != k || bread.cols() != k) {
    throw ValidationError("bread shape does not match scores");
  }
  if (cluster_ids.size() > 2) {
    throw ValidationError("at most two cluster dimensions are supported");
  }

  VcovResult out;
  Eigen::MatrixXd meat;
  if (cluster_ids.empty()) {
    std::vector<int> singleton(static_cast<std::size_t>(n));
    std::iota(singleton.begin(), singleton.end(), 0);
    meat = clustered_meat(scores, singleton);
  } else if (cluster_ids.size() == 1) {
    out.n_clusters.push_back(count_clusters(cluster_ids[0]));
    meat = clustered_meat(scores, cluster_ids[0]);
  } else {
    const auto& a = cluster_ids[0];
    const auto& b = cluster_ids[1];
    if (a.size() != b.size()) throw ValidationError("cluster id lengths differ");
    std::map<std::pair<int, int>, int> pair_id;
    std::vector<int> both(a.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
      auto [it, fresh] =
          pair_id.try_emplace({a[r], b[r]}, static_cast<int>(pair_id.size()));
      both[r] = it->second;
    }
    out.n_clusters = {count_clusters(a), count_clusters(b)};
    meat = clustered_meat(scores, a) + clustered_meat(scores, b);
    // The intersection may legitimately be a single cluster only when both
    // dimensions are; that case was rejected above.
    meat -= clustered_meat(scores, both);
  }

  Eigen::MatrixXd bread_inv = bread.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd v = bread_inv * meat * bread_inv;
  out.raw = 0.5 * (v + v.transpose());
  out.vcov = out.raw;
  if (k == 0) return out;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.raw);
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  if (out.min_eigenvalue < 0.0) {
    Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
    out.vcov = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    out.vcov = 0.5 * (out.vcov + out.vcov.transpose());
    out.psd_repaired = true;
  }
  return out;
}

}  // namespace gravnet::regress
