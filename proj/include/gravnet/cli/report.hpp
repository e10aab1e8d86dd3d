#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gravnet/regress/fit.hpp"

namespace gravnet::cli {

struct ColumnResult {
  std::string name;
  regress::ModelSpec spec;
  regress::FitResult fit;
};

// Two-sided p-value under the normal reference distribution.
double normal_p_value(double estimate, double se);

// "", "*", "**" or "***" for p < 0.10 / 0.05 / 0.01.
std::string stars(double p);

// fit.json: title plus one block per column with coefficients, standard
// errors, vcov, sample counts and diagnostics.
std::string results_json(const std::string& title, const std::vector<ColumnResult>& cols);

// Side-by-side table: coefficient with stars, standard error in
// parentheses underneath, then sample and fit rows.
std::string results_table(const std::string& title, const std::vector<ColumnResult>& cols);

// `key,residual` for the rows used in the fit.
void write_residuals_csv(std::ostream& out, const regress::FitResult& fit);

}  // namespace gravnet::cli
