#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gravnet::regress {

// Dense categorical column: level[r] in 0..n_levels-1.
struct FactorColumn {
  std::string name;
  std::vector<int> level;
  std::vector<std::string> level_names;

  int n_levels() const noexcept { return static_cast<int>(level_names.size()); }
};

// Re-densifies `f` after keeping only rows with keep[r] true. Levels that
// lose every row disappear; surviving levels keep their relative order.
FactorColumn subset(const FactorColumn& f, const std::vector<bool>& keep);

struct AbsorbOptions {
  double tolerance = 1e-12;  // relative residual of the normal equations
  int max_iterations = 0;    // 0: 10 * levels + 1000
};

// Weighted within-transform: replaces v by its residual from a weighted
// least-squares projection on the dummies of every factor. One factor is
// projected exactly; several use Jacobi-preconditioned conjugate gradients
// on the dummy normal equations D'WD a = D'Wv.
class Absorber {
 public:
  Absorber(const std::vector<FactorColumn>& factors, Eigen::VectorXd weights,
           AbsorbOptions options = {});

  void demean(Eigen::Ref<Eigen::VectorXd> v) const;
  void demean_columns(Eigen::Ref<Eigen::MatrixXd> m) const;

  // Dummy coefficients a for `v` (before demeaning), concatenated per factor.
  Eigen::VectorXd solve_effects(const Eigen::VectorXd& v) const;

  int total_levels() const noexcept { return total_levels_; }
  // Largest CG iteration count seen by demean/solve_effects so far.
  int max_iterations_used() const noexcept { return max_used_; }

 private:
  Eigen::VectorXd apply_dummies(const Eigen::VectorXd& a) const;      // D a
  Eigen::VectorXd apply_dummies_t(const Eigen::VectorXd& u) const;    // D'W u

  std::vector<std::vector<int>> levels_;
  std::vector<int> offset_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd level_weight_;  // diag(D'WD)
  int total_levels_ = 0;
  AbsorbOptions options_;
  mutable int max_used_ = 0;
};

}  // namespace gravnet::regress
