#include "gravnet/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "gravnet/core/csv.hpp"

namespace gravnet::cli {

namespace {

using json = nlohmann::ordered_json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fixed(double v, int digits = 3) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::vector<std::string> factor_names(const std::vector<FactorSpec>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs) out.push_back(f.name);
  return out;
}

}  // namespace

double normal_p_value(double estimate, double se) {
  if (!(se > 0.0)) return std::nan("");
  return std::erfc(std::abs(estimate / se) / std::sqrt(2.0));
}

std::string stars(double p) {
  if (!(p < 0.10)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  return "*";
}

std::string results_json(const std::string& title, const std::vector<ColumnResult>& cols) {
  json root;
  root["title"] = title;
  root["columns"] = json::array();
  for (const auto& c : cols) {
    const auto& f = c.fit;
    json block;
    block["name"] = c.name;
    block["family"] = regress::to_string(f.family);
    block["outcome"] = c.spec.outcome;
    block["terms"] = f.terms;
    block["coefficients"] = json::object();
    block["std_errors"] = json::object();
    block["p_values"] = json::object();
    for (std::size_t t = 0; t < f.terms.size(); ++t) {
      const auto k = static_cast<Eigen::Index>(t);
      block["coefficients"][f.terms[t]] = number(f.coefficients[k]);
      block["std_errors"][f.terms[t]] = number(f.se[k]);
      block["p_values"][f.terms[t]] = number(normal_p_value(f.coefficients[k], f.se[k]));
    }
    json vcov = json::array();
    for (Eigen::Index r = 0; r < f.vcov.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index k = 0; k < f.vcov.cols(); ++k) row.push_back(number(f.vcov(r, k)));
      vcov.push_back(row);
    }
    block["vcov"] = vcov;
    block["fit_stat"] = number(f.fit_stat);
    block["n_total"] = f.n_total;
    block["n_dropped_by_fe"] = f.n_dropped_by_fe;
    block["n_used"] = f.n_used;
    block["n_missing_deleted"] = f.n_missing_deleted;
    block["converged"] = f.converged;
    block["iterations"] = f.iterations;
    block["absorbed"] = f.absorbed;
    block["cluster"] = factor_names(c.spec.cluster_dims);

    const auto& d = f.diagnostics;
    json diag;
    diag["fit_stat_definition"] = d.fit_stat_definition;
    diag["vcov_type"] = d.vcov_type;
    diag["small_sample_correction"] = d.small_sample_correction;
    diag["n_clusters"] = d.n_clusters;
    diag["vcov_psd_repaired"] = d.vcov_psd_repaired;
    diag["vcov_min_eigenvalue"] = number(d.vcov_min_eigenvalue);
    diag["absorb_max_iterations"] = d.absorb_max_iterations;
    if (f.family == regress::Family::ols) {
      diag["within_r2"] = number(d.within_r2);
    } else {
      diag["deviance"] = number(d.deviance);
      diag["log_likelihood"] = number(d.log_likelihood);
      diag["null_log_likelihood"] = number(d.null_log_likelihood);
      diag["constant_log_likelihood"] = number(d.constant_log_likelihood);
      diag["pseudo_r2_constant_null"] = number(d.pseudo_r2_constant_null);
      diag["moment_condition_max_rel"] = number(d.moment_condition_max_rel);
      diag["fe_moment_max_rel"] = number(d.fe_moment_max_rel);
    }
    diag["warnings"] = d.warnings;
    block["diagnostics"] = diag;
    root["columns"].push_back(block);
  }
  return root.dump(2) + "\n";
}

std::string results_table(const std::string& title, const std::vector<ColumnResult>& cols) {
  constexpr std::size_t label_w = 26, col_w = 15;
  std::vector<std::string> terms;
  for (const auto& c : cols) {
    for (const auto& t : c.fit.terms) {
      if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    }
  }
  std::ostringstream out;
  const std::size_t width = label_w + col_w * cols.size();
  if (!title.empty()) out << title << "\n";
  out << std::string(width, '=') << "\n" << pad_right("", label_w);
  for (const auto& c : cols) out << pad_left(c.name, col_w);
  out << "\n" << pad_right("Dependent variable", label_w);
  for (const auto& c : cols) out << pad_left(c.spec.outcome, col_w);
  out << "\n" << pad_right("Model", label_w);
  for (const auto& c : cols) {
    out << pad_left(c.fit.family == regress::Family::ppml ? "PPML" : "OLS", col_w);
  }
  out << "\n" << std::string(width, '-') << "\n";

  for (const auto& term : terms) {
    std::string est_line = pad_right(term, label_w);
    std::string se_line = pad_right("", label_w);
    for (const auto& c : cols) {
      const auto& f = c.fit;
      auto it = std::find(f.terms.begin(), f.terms.end(), term);
      if (it == f.terms.end()) {
        est_line += pad_left("", col_w);
        se_line += pad_left("", col_w);
        continue;
      }
      const auto k = static_cast<Eigen::Index>(it - f.terms.begin());
      const double p = normal_p_value(f.coefficients[k], f.se[k]);
      est_line += pad_left(fixed(f.coefficients[k]) + pad_right(stars(p), 3), col_w);
      se_line += pad_left("(" + fixed(f.se[k]) + ")   ", col_w);
    }
    out << est_line << "\n" << se_line << "\n";
  }
  out << std::string(width, '-') << "\n";

  auto row = [&](const std::string& label, auto cell) {
    out << pad_right(label, label_w);
    for (const auto& c : cols) out << pad_left(cell(c), col_w);
    out << "\n";
  };
  row("Fixed effects", [](const ColumnResult& c) {
    auto names = factor_names(c.spec.factors);
    return names.empty() ? std::string("none") : join(names, "+");
  });
  row("Clustered by", [](const ColumnResult& c) {
    auto names = factor_names(c.spec.cluster_dims);
    return names.empty() ? std::string("HC1") : join(names, "+");
  });
  row("N", [](const ColumnResult& c) { return std::to_string(c.fit.n_used); });
  row("N explained by FEs", [](const ColumnResult& c) {
    return c.fit.family == regress::Family::ppml ? std::to_string(c.fit.n_dropped_by_fe)
                                                 : std::string("");
  });
  row("R2 / pseudo-R2", [](const ColumnResult& c) { return fixed(c.fit.fit_stat); });
  bool all_converged = true;
  for (const auto& c : cols) all_converged = all_converged && c.fit.converged;
  if (!all_converged) {
    row("Converged", [](const ColumnResult& c) {
      return std::string(c.fit.converged ? "yes" : "NO");
    });
  }
  out << std::string(width, '=') << "\n";
  out << "Standard errors in parentheses. * p<0.10, ** p<0.05, *** p<0.01.\n";
  return out.str();
}

void write_residuals_csv(std::ostream& out, const regress::FitResult& fit) {
  csv::write_row(out, {"key", "residual"});
  for (std::size_t r = 0; r < fit.row_keys.size(); ++r) {
    csv::write_row(out, {fit.row_keys[r],
                         csv::format_number(fit.residuals[static_cast<Eigen::Index>(r)])});
  }
}

}  // namespace gravnet::cli
