#include "gravnet/regress/absorb.hpp"

#include <algorithm>
#include <cmath>

#include "gravnet/core/errors.hpp"

namespace gravnet::regress {

FactorColumn subset(const FactorColumn& f, const std::vector<bool>& keep) {
  std::vector<int> remap(f.level_names.size(), -1);
  std::vector<bool> used(f.level_names.size(), false);
  for (std::size_t r = 0; r < f.level.size(); ++r) {
    if (keep[r]) used[f.level[r]] = true;
  }
  FactorColumn out{f.name, {}, {}};
  for (std::size_t l = 0; l < used.size(); ++l) {
    if (!used[l]) continue;
    remap[l] = static_cast<int>(out.level_names.size());
    out.level_names.push_back(f.level_names[l]);
  }
  for (std::size_t r = 0; r < f.level.size(); ++r) {
    if (keep[r]) out.level.push_back(remap[f.level[r]]);
  }
  return out;
}

Absorber::Absorber(const std::vector<FactorColumn>& factors, Eigen::VectorXd weights,
                   AbsorbOptions options)
    : weights_(std::move(weights)), options_(options) {
  const auto n = weights_.size();
  for (const auto& f : factors) {
    if (static_cast<Eigen::Index>(f.level.size()) != n) {
      throw ValidationError("factor '" + f.name + "' length does not match rows");
    }
    offset_.push_back(total_levels_);
    levels_.push_back(f.level);
    total_levels_ += f.n_levels();
  }
  level_weight_ = Eigen::VectorXd::Zero(total_levels_);
  for (std::size_t f = 0; f < levels_.size(); ++f) {
    for (Eigen::Index r = 0; r < n; ++r) {
      level_weight_[offset_[f] + levels_[f][r]] += weights_[r];
    }
  }
  if (options_.max_iterations <= 0) options_.max_iterations = 10 * total_levels_ + 1000;
}

Eigen::VectorXd Absorber::apply_dummies(const Eigen::VectorXd& a) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(weights_.size());
  for (std::size_t f = 0; f < levels_.size(); ++f) {
    const auto& lv = levels_[f];
    for (Eigen::Index r = 0; r < u.size(); ++r) u[r] += a[offset_[f] + lv[r]];
  }
  return u;
}

Eigen::VectorXd Absorber::apply_dummies_t(const Eigen::VectorXd& u) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(total_levels_);
  for (std::size_t f = 0; f < levels_.size(); ++f) {
    const auto& lv = levels_[f];
    for (Eigen::Index r = 0; r < u.size(); ++r) {
      g[offset_[f] + lv[r]] += weights_[r] * u[r];
    }
  }
  return g;
}

Eigen::VectorXd Absorber::solve_effects(const Eigen::VectorXd& v) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(total_levels_);
  if (levels_.empty()) return a;
  const Eigen::VectorXd b = apply_dummies_t(v);
  Eigen::VectorXd inv_diag(total_levels_);
  for (int l = 0; l < total_levels_; ++l) {
    inv_diag[l] = level_weight_[l] > 0.0 ? 1.0 / level_weight_[l] : 0.0;
  }
  if (levels_.size() == 1) return inv_diag.cwiseProduct(b);

  // Preconditioned CG on the semidefinite system D'WD a = b. Rounding puts
  // a little of b in the null space, so the residual is only driven down to
  // a floor set by the magnitude of the terms summed into b; past that the
  // iterate drifts along the null space and D a loses precision.
  const double b_norm = b.norm();
  const double floor = 1e-14 * apply_dummies_t(v.cwiseAbs()).norm();
  if (b_norm <= floor) return a;
  const double target = std::max(options_.tolerance * b_norm, floor);
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  Eigen::VectorXd best = a;
  double best_norm = b_norm;
  int since_best = 0;
  int it = 0;
  for (; it < options_.max_iterations; ++it) {
    Eigen::VectorXd q = apply_dummies_t(apply_dummies(p));
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    a += alpha * p;
    r -= alpha * q;
    const double r_norm = r.norm();
    if (r_norm < best_norm) {
      best = a;
      best_norm = r_norm;
      since_best = 0;
    } else if (++since_best > 50) {
      break;  // stagnated at the rounding floor
    }
    if (r_norm <= target) break;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  a = best;
  max_used_ = std::max(max_used_, it);
  return a;
}

void Absorber::demean(Eigen::Ref<Eigen::VectorXd> v) const {
  if (levels_.empty()) return;
  Eigen::VectorXd copy = v;
  Eigen::VectorXd fitted = apply_dummies(solve_effects(copy));
  v -= fitted;
  if (levels_.size() > 1) {
    // Refinement passes against the CG tolerance and rounding.
    for (int pass = 0; pass < 2; ++pass) {
      copy = v;
      v -= apply_dummies(solve_effects(copy));
    }
  }
}

void Absorber::demean_columns(Eigen::Ref<Eigen::MatrixXd> m) const {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::VectorXd col = m.col(c);
    demean(col);
    m.col(c) = col;
  }
}

}  // namespace gravnet::regress
