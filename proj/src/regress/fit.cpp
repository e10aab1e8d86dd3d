#include "gravnet/regress/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gravnet/core/errors.hpp"
#include "gravnet/regress/vcov.hpp"

namespace gravnet::regress {

namespace {

constexpr double kPivotThreshold = 1e-10;

std::vector<std::vector<int>> cluster_ids(const DesignMatrix& dm) {
  std::vector<std::vector<int>> ids;
  for (const auto& c : dm.clusters) ids.push_back(c.level);
  return ids;
}

std::string vcov_label(const DesignMatrix& dm) {
  if (dm.clusters.empty()) return "heteroskedasticity-robust (HC1)";
  std::string s = dm.clusters.size() == 1 ? "clustered by " : "two-way clustered by ";
  for (std::size_t c = 0; c < dm.clusters.size(); ++c) {
    s += (c ? " and " : "") + dm.clusters[c].name;
  }
  return s;
}

std::size_t index_of(const std::vector<std::string>& terms, const std::string& term) {
  auto it = std::find(terms.begin(), terms.end(), term);
  if (it == terms.end()) throw ValidationError("no coefficient for term '" + term + "'");
  return static_cast<std::size_t>(it - terms.begin());
}

void fill_common(FitResult& fit, const DesignMatrix& dm) {
  fit.family = dm.family;
  fit.terms = dm.column_names;
  fit.n_used = dm.rows();
  fit.n_dropped_by_fe = dm.n_dropped_by_fe;
  fit.n_total = dm.n_total();
  fit.n_missing_deleted = dm.n_missing_deleted;
  fit.row_keys = dm.row_keys;
  for (const auto& f : dm.factors) fit.absorbed.push_back(f.name);
  fit.diagnostics.vcov_type = vcov_label(dm);
}

void attach_vcov(FitResult& fit, const DesignMatrix& dm, const Eigen::MatrixXd& scores,
                 const Eigen::MatrixXd& bread) {
  auto v = cluster_vcov(scores, bread, cluster_ids(dm));
  fit.vcov = v.vcov;
  fit.se = v.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.diagnostics.n_clusters = v.n_clusters;
  fit.diagnostics.vcov_psd_repaired = v.psd_repaired;
  fit.diagnostics.vcov_min_eigenvalue = v.min_eigenvalue;
  if (v.psd_repaired) {
    fit.diagnostics.warnings.push_back(
        "clustered variance was not positive semi-definite; negative eigenvalues "
        "truncated to 0");
  }
}

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index r = 0; r < y.size(); ++r) {
    dev += y[r] > 0.0 ? y[r] * std::log(y[r] / mu[r]) - (y[r] - mu[r]) : mu[r];
  }
  return 2.0 * dev;
}

double poisson_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0.0;
  for (Eigen::Index r = 0; r < y.size(); ++r) {
    ll += y[r] * eta[r] - std::exp(eta[r]) - std::lgamma(y[r] + 1.0);
  }
  return ll;
}

struct IrlsOutcome {
  Eigen::VectorXd eta;
  Eigen::VectorXd beta;
  double deviance = 0.0;
  int iterations = 0;
  bool converged = false;
  int absorb_iterations = 0;
};

IrlsOutcome run_irls(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                     const std::vector<FactorColumn>& factors,
                     const std::vector<std::string>& names, const PpmlOptions& opt) {
  const auto n = y.size();
  const double min_eta = std::log(std::numeric_limits<double>::min());
  double positive_sum = 0.0;
  int positive = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (y[r] > 0.0) {
      positive_sum += y[r];
      ++positive;
    }
  }
  const double shift = 0.5 * positive_sum / positive;

  IrlsOutcome out;
  out.eta.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    out.eta[r] = std::max(std::log(y[r] + shift), min_eta);
  }
  out.beta = Eigen::VectorXd::Zero(X.cols());
  Eigen::VectorXd mu = out.eta.array().exp();
  double dev = poisson_deviance(y, mu);

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    out.iterations = iter;
    Eigen::VectorXd z = out.eta.array() + (y - mu).array() / mu.array();
    Absorber absorber(factors, mu);
    Eigen::VectorXd z_within = z;
    absorber.demean(z_within);
    Eigen::MatrixXd X_within = X;
    absorber.demean_columns(X_within);
    auto wls = solve_wls(X_within, z_within, mu, names);
    out.absorb_iterations = std::max(out.absorb_iterations, absorber.max_iterations_used());

    Eigen::VectorXd eta_next = z - (z_within - X_within * wls.beta);
    Eigen::VectorXd beta_next = wls.beta;
    Eigen::VectorXd mu_next = eta_next.array().exp();
    double dev_next = poisson_deviance(y, mu_next);
    // Step halving on overshoot.
    for (int half = 0; half < 30 && (!std::isfinite(dev_next) || dev_next > dev * (1.0 + 1e-10)) &&
                       iter > 1;
         ++half) {
      eta_next = 0.5 * (eta_next + out.eta);
      beta_next = 0.5 * (beta_next + out.beta);
      mu_next = eta_next.array().exp();
      dev_next = poisson_deviance(y, mu_next);
    }
    const double change = std::abs(dev_next - dev) / std::max(std::abs(dev_next), 0.1);
    out.eta = std::move(eta_next);
    out.beta = std::move(beta_next);
    mu = std::move(mu_next);
    dev = dev_next;
    if (change <= opt.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.deviance = dev;
  return out;
}

}  // namespace

double FitResult::coefficient(const std::string& term) const {
  return coefficients[static_cast<Eigen::Index>(index_of(terms, term))];
}

double FitResult::std_error(const std::string& term) const {
  return se[static_cast<Eigen::Index>(index_of(terms, term))];
}

WlsSolution solve_wls(const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& w, const std::vector<std::string>& names) {
  const auto k = X.cols();
  WlsSolution out;
  out.beta = Eigen::VectorXd::Zero(k);
  out.bread = Eigen::MatrixXd::Zero(k, k);
  if (k == 0) return out;

  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd Xs = sw.asDiagonal() * X;
  Eigen::VectorXd norms = Xs.colwise().norm();
  std::vector<std::string> dropped;
  for (Eigen::Index c = 0; c < k; ++c) {
    if (!(norms[c] > 0.0)) dropped.push_back(names[c]);
  }
  if (dropped.empty()) {
    Eigen::MatrixXd Xn = Xs * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xn);
    const auto& R = qr.matrixR();
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index c = 0; c < k; ++c) {
      if (std::abs(R(c, c)) < kPivotThreshold) dropped.push_back(names[perm[c]]);
    }
    if (dropped.empty()) {
      Eigen::VectorXd scaled = qr.solve(sw.cwiseProduct(z));
      out.beta = scaled.cwiseQuotient(norms);
      out.bread = Xs.transpose() * Xs;
      return out;
    }
  }
  std::string list;
  for (const auto& d : dropped) list += (list.empty() ? "" : ", ") + d;
  throw CollinearityError("rank-deficient design after absorbing fixed effects; "
                          "collinear column(s): " + list);
}

FitResult ols_fit(const DesignMatrix& dm) {
  const auto n = static_cast<Eigen::Index>(dm.rows());
  const auto k = dm.X.cols();
  FitResult fit;
  fill_common(fit, dm);

  Absorber absorber(dm.factors, Eigen::VectorXd::Ones(n));
  if (static_cast<long>(n) <= k + absorber.total_levels()) {
    throw DegenerateModelError("OLS needs more observations (" + std::to_string(n) +
                               ") than columns plus absorbed levels (" +
                               std::to_string(k + absorber.total_levels()) + ")");
  }
  Eigen::VectorXd y_within = dm.y;
  absorber.demean(y_within);
  Eigen::MatrixXd X_within = dm.X;
  absorber.demean_columns(X_within);

  auto wls = solve_wls(X_within, y_within, Eigen::VectorXd::Ones(n), dm.column_names);
  fit.coefficients = wls.beta;
  fit.residuals = y_within - X_within * wls.beta;

  const double ssr = fit.residuals.squaredNorm();
  const double tss = (dm.y.array() - dm.y.mean()).matrix().squaredNorm();
  fit.fit_stat = tss > 0.0 ? 1.0 - ssr / tss : 0.0;
  const double wss = y_within.squaredNorm();
  fit.diagnostics.within_r2 = wss > 0.0 ? 1.0 - ssr / wss : 0.0;
  fit.diagnostics.fit_stat_definition = "R2 = 1 - SSR/TSS on the unabsorbed outcome";
  fit.diagnostics.absorb_max_iterations = absorber.max_iterations_used();

  Eigen::MatrixXd scores = X_within.array().colwise() * fit.residuals.array();
  attach_vcov(fit, dm, scores, wls.bread);
  return fit;
}

std::pair<DesignMatrix, std::size_t> drop_separated(const DesignMatrix& dm) {
  const auto n = dm.rows();
  for (std::size_t r = 0; r < n; ++r) {
    if (dm.y[r] < 0.0) {
      throw ValidationError("negative outcome in row " + dm.row_keys[r]);
    }
  }
  std::vector<bool> keep(n, true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& f : dm.factors) {
      std::vector<bool> has_positive(f.level_names.size(), false);
      for (std::size_t r = 0; r < n; ++r) {
        if (keep[r] && dm.y[r] > 0.0) has_positive[f.level[r]] = true;
      }
      for (std::size_t r = 0; r < n; ++r) {
        if (keep[r] && !has_positive[f.level[r]]) {
          keep[r] = false;
          changed = true;
        }
      }
    }
  }
  const auto kept = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  if (kept == 0) {
    throw DegenerateModelError("every observation is explained by the fixed effects");
  }
  return {subset_rows(dm, keep), n - kept};
}

FitResult ppml_fit(const DesignMatrix& dm, PpmlOptions options) {
  const auto n = static_cast<Eigen::Index>(dm.rows());
  for (Eigen::Index r = 0; r < n; ++r) {
    if (dm.y[r] < 0.0) throw ValidationError("negative outcome in row " + dm.row_keys[r]);
  }
  if (!(dm.y.maxCoeff() > 0.0)) {
    throw DegenerateModelError("PPML outcome is zero in every row");
  }
  FitResult fit;
  fill_common(fit, dm);

  auto irls = run_irls(dm.y, dm.X, dm.factors, dm.column_names, options);
  fit.coefficients = irls.beta;
  fit.converged = irls.converged;
  fit.iterations = irls.iterations;
  if (!irls.converged) {
    fit.diagnostics.warnings.push_back("IRLS did not converge in " +
                                       std::to_string(options.max_iterations) +
                                       " iterations");
  }

  const Eigen::VectorXd mu = irls.eta.array().exp();
  fit.residuals = dm.y - mu;

  Absorber absorber(dm.factors, mu);
  Eigen::MatrixXd X_within = dm.X;
  absorber.demean_columns(X_within);
  Eigen::MatrixXd bread = X_within.transpose() * mu.asDiagonal() * X_within;
  Eigen::MatrixXd scores = X_within.array().colwise() * fit.residuals.array();
  attach_vcov(fit, dm, scores, bread);

  auto& diag = fit.diagnostics;
  diag.deviance = irls.deviance;
  diag.log_likelihood = poisson_loglik(dm.y, irls.eta);
  diag.absorb_max_iterations = std::max(irls.absorb_iterations, absorber.max_iterations_used());

  auto null_model = run_irls(dm.y, Eigen::MatrixXd(n, 0), dm.factors, {}, options);
  diag.null_log_likelihood = poisson_loglik(dm.y, null_model.eta);
  const double ybar = dm.y.mean();
  diag.constant_log_likelihood =
      poisson_loglik(dm.y, Eigen::VectorXd::Constant(n, std::log(ybar)));
  fit.fit_stat = 1.0 - diag.log_likelihood / diag.null_log_likelihood;
  diag.pseudo_r2_constant_null = 1.0 - diag.log_likelihood / diag.constant_log_likelihood;
  diag.fit_stat_definition =
      "McFadden pseudo-R2 = 1 - LL(model)/LL(fixed-effects-only model)";

  for (Eigen::Index c = 0; c < dm.X.cols(); ++c) {
    const double moment = dm.X.col(c).dot(fit.residuals);
    const double scale = dm.X.col(c).cwiseAbs().dot(dm.y);
    diag.moment_condition_max_rel =
        std::max(diag.moment_condition_max_rel, scale > 0.0 ? std::abs(moment) / scale : 0.0);
  }
  for (const auto& f : dm.factors) {
    Eigen::VectorXd gap = Eigen::VectorXd::Zero(f.n_levels());
    Eigen::VectorXd total = Eigen::VectorXd::Zero(f.n_levels());
    for (Eigen::Index r = 0; r < n; ++r) {
      gap[f.level[r]] += fit.residuals[r];
      total[f.level[r]] += dm.y[r];
    }
    for (int l = 0; l < f.n_levels(); ++l) {
      if (total[l] > 0.0) {
        diag.fe_moment_max_rel = std::max(diag.fe_moment_max_rel, std::abs(gap[l]) / total[l]);
      }
    }
  }
  return fit;
}

FitResult fit_model(const DataSource& data, const ModelSpec& spec) {
  auto dm = build_design(data, spec);
  if (spec.family == Family::ols) return ols_fit(dm);
  auto [reduced, dropped] = drop_separated(dm);
  return ppml_fit(reduced);
}

}  // namespace gravnet::regress
