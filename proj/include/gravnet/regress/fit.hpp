#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gravnet/regress/design.hpp"
#include "gravnet/regress/model_spec.hpp"

namespace gravnet::regress {

struct FitDiagnostics {
  std::string fit_stat_definition;
  std::string small_sample_correction = "G/(G-1)*(n-1)/(n-k) per cluster dimension";
  std::string vcov_type;
  std::vector<int> n_clusters;
  bool vcov_psd_repaired = false;
  double vcov_min_eigenvalue = 0.0;
  int absorb_max_iterations = 0;
  // OLS
  double within_r2 = 0.0;
  // PPML
  double deviance = 0.0;
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;         // factors-only model
  double constant_log_likelihood = 0.0;     // intercept-only model
  double pseudo_r2_constant_null = 0.0;     // 1 - ll / ll(intercept only)
  double moment_condition_max_rel = 0.0;    // max_x |sum x(y-mu)| / sum |x| y
  double fe_moment_max_rel = 0.0;           // max_level |sum (y-mu)| / sum y
  std::vector<std::string> warnings;
};

struct FitResult {
  Family family = Family::ols;
  std::vector<std::string> terms;
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd vcov;
  Eigen::VectorXd se;
  double fit_stat = 0.0;  // R^2 (OLS) or McFadden pseudo-R^2 (PPML)
  std::size_t n_total = 0;
  std::size_t n_dropped_by_fe = 0;
  std::size_t n_used = 0;
  std::size_t n_missing_deleted = 0;
  Eigen::VectorXd residuals;  // y - fitted, on the rows used
  std::vector<std::string> row_keys;
  std::vector<std::string> absorbed;  // names of absorbed factors
  bool converged = true;
  int iterations = 0;
  FitDiagnostics diagnostics;

  // Throws ValidationError for an unknown term.
  double coefficient(const std::string& term) const;
  double std_error(const std::string& term) const;
};

// Weighted least squares on already-demeaned columns. Columns are scaled
// to unit norm and factored with column-pivoted QR; an absolute pivot below
// 1e-10 is a rank deficiency and raises CollinearityError naming the
// columns left out.
struct WlsSolution {
  Eigen::VectorXd beta;
  Eigen::MatrixXd bread;  // X'WX
};
WlsSolution solve_wls(const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& w, const std::vector<std::string>& names);

// Least squares with the factors absorbed exactly. R^2 is measured on the
// unabsorbed outcome; scores are x_r * e_r.
FitResult ols_fit(const DesignMatrix& dm);

// Iteratively removes rows of any factor level whose remaining rows all
// have a zero outcome (this includes zero-outcome singletons) until nothing
// changes. Returns the reduced design and the number of rows removed.
// Throws ValidationError on a negative outcome and DegenerateModelError
// when every row is removed.
std::pair<DesignMatrix, std::size_t> drop_separated(const DesignMatrix& dm);

struct PpmlOptions {
  double tolerance = 1e-8;  // relative deviance change
  int max_iterations = 100;
};

// Poisson pseudo-maximum likelihood by IRLS with weighted within-transform
// of the working response and regressors at every iteration. Expects
// drop_separated to have been applied. Returns converged=false (with a
// warning) when max_iterations is hit.
FitResult ppml_fit(const DesignMatrix& dm, PpmlOptions options = {});

// build_design, then drop_separated + ppml_fit or ols_fit.
FitResult fit_model(const DataSource& data, const ModelSpec& spec);

}  // namespace gravnet::regress
