#include "gravnet/regress/design.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"
#include "gravnet/core/stats.hpp"

namespace gravnet::regress {

namespace {

constexpr std::size_t kMaxListed = 10;

// One candidate estimation row before list-wise deletion.
struct SourceRow {
  std::string key;
  const RegionId* origin = nullptr;
  const RegionId* destination = nullptr;  // null for region-level rows
  const DyadTable::Row* measures = nullptr;
  const RegionAttributes* origin_attrs = nullptr;
  const RegionAttributes* destination_attrs = nullptr;
};

using Getter = std::function<double(const SourceRow&)>;

Getter resolve_measure(const DataSource& data, const std::string& name) {
  if (data.dyads) {
    for (const char* prefix : {"i:", "j:"}) {
      if (name.rfind(prefix, 0) != 0) continue;
      std::string attr = name.substr(2);
      if (!data.regions || !data.regions->has_attribute(attr)) {
        throw ValidationError("no region attribute '" + attr + "' for '" + name + "'");
      }
      bool origin = prefix[0] == 'i';
      return [attr, origin](const SourceRow& r) {
        const auto* a = origin ? r.origin_attrs : r.destination_attrs;
        return a ? a->get(attr) : kMissing;
      };
    }
    auto m = data.dyads->find_measure(name);
    if (!m) throw ValidationError("data has no measure '" + name + "'");
    return [m = *m](const SourceRow& r) { return (*r.measures)[m]; };
  }
  if (!data.regions->has_attribute(name)) {
    throw ValidationError("region data has no attribute '" + name + "'");
  }
  return [name](const SourceRow& r) { return r.origin_attrs->get(name); };
}

using LevelOf = std::function<std::string(const SourceRow&)>;

LevelOf resolve_factor(const DataSource& data, const FactorSpec& f,
                       std::vector<Getter>& extra_getters) {
  const bool dyadic = data.dyads != nullptr;
  auto need_dyads = [&] {
    if (!dyadic) {
      throw ValidationError("factor '" + f.name + "' needs dyadic data");
    }
  };
  switch (f.rule) {
    case FactorRule::origin_region:
      return [](const SourceRow& r) { return r.origin->code(); };
    case FactorRule::destination_region:
      need_dyads();
      return [](const SourceRow& r) { return r.destination->code(); };
    case FactorRule::country_pair:
      need_dyads();
      return [](const SourceRow& r) {
        return r.origin->country() + "-" + r.destination->country();
      };
    case FactorRule::origin_country:
      return [](const SourceRow& r) { return r.origin->country(); };
    case FactorRule::destination_country:
      need_dyads();
      return [](const SourceRow& r) { return r.destination->country(); };
    case FactorRule::region_pair:
      if (!dyadic) return [](const SourceRow& r) { return r.origin->code(); };
      return [](const SourceRow& r) {
        return r.origin->code() + "," + r.destination->code();
      };
    case FactorRule::custom_column: {
      auto get = resolve_measure(data, f.column);
      extra_getters.push_back(get);
      return [get](const SourceRow& r) { return csv::format_number(get(r)); };
    }
  }
  throw ValidationError("unsupported factor rule");
}

FactorColumn make_factor(const std::string& name, const std::vector<SourceRow>& rows,
                         const LevelOf& level_of) {
  FactorColumn f{name, {}, {}};
  std::map<std::string, int> ids;
  f.level.reserve(rows.size());
  for (const auto& r : rows) {
    auto [it, fresh] = ids.try_emplace(level_of(r), static_cast<int>(ids.size()));
    if (fresh) f.level_names.push_back(it->first);
    f.level.push_back(it->second);
  }
  return f;
}

std::string join_limited(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size() && k < kMaxListed; ++k) {
    out += (k ? ", " : "") + items[k];
  }
  if (items.size() > kMaxListed) {
    out += ", ... (" + std::to_string(items.size()) + " total)";
  }
  return out;
}

}  // namespace

DesignMatrix build_design(const DataSource& data, const ModelSpec& spec) {
  spec.validate();
  if (!data.dyads && !data.regions) throw ValidationError("no estimation data");
  if (spec.continuous_terms.empty() && spec.decile_terms.empty()) {
    throw ValidationError("model has no regressors");
  }

  std::vector<SourceRow> candidates;
  if (data.dyads) {
    for (const auto& [key, row] : data.dyads->rows()) {
      SourceRow r;
      r.key = key.origin.code() + "," + key.destination.code();
      r.origin = &key.origin;
      r.destination = &key.destination;
      r.measures = &row;
      if (data.regions) {
        r.origin_attrs = data.regions->find(key.origin);
        r.destination_attrs = data.regions->find(key.destination);
      }
      candidates.push_back(std::move(r));
    }
  } else {
    for (const auto& [region, attrs] : data.regions->rows()) {
      SourceRow r;
      r.key = region.code();
      r.origin = &region;
      r.origin_attrs = &attrs;
      candidates.push_back(std::move(r));
    }
  }

  const Getter outcome = resolve_measure(data, spec.outcome);
  std::vector<Getter> terms;
  for (const auto& t : spec.continuous_terms) terms.push_back(resolve_measure(data, t.measure));
  std::vector<Getter> deciles;
  for (const auto& d : spec.decile_terms) deciles.push_back(resolve_measure(data, d));
  std::vector<Getter> factor_getters;
  std::vector<LevelOf> factor_levels;
  for (const auto& f : spec.factors) {
    factor_levels.push_back(resolve_factor(data, f, factor_getters));
  }
  std::vector<LevelOf> cluster_levels;
  for (const auto& f : spec.cluster_dims) {
    cluster_levels.push_back(resolve_factor(data, f, factor_getters));
  }

  DesignMatrix dm;
  dm.family = spec.family;
  std::vector<SourceRow> rows;
  for (auto& r : candidates) {
    bool complete = !is_missing(outcome(r));
    for (const auto* group : {&terms, &deciles, &factor_getters}) {
      for (const auto& g : *group) complete = complete && !is_missing(g(r));
    }
    if (complete) {
      rows.push_back(std::move(r));
    } else {
      ++dm.n_missing_deleted;
    }
  }
  if (rows.empty()) throw DegenerateModelError("design has no complete rows");
  const auto n = static_cast<Eigen::Index>(rows.size());

  dm.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    dm.y[r] = outcome(rows[r]);
    dm.row_keys.push_back(rows[r].key);
  }

  std::vector<Eigen::VectorXd> columns;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& term = spec.continuous_terms[t];
    Eigen::VectorXd col(n);
    std::vector<std::string> bad;
    for (Eigen::Index r = 0; r < n; ++r) {
      double v = terms[t](rows[r]);
      if (term.transform == Transform::log) {
        if (!(v > 0.0)) bad.push_back(rows[r].key);
        v = std::log(v);
      }
      col[r] = v;
    }
    if (!bad.empty()) {
      throw ValidationError("log of non-positive '" + term.measure +
                            "' in rows: " + join_limited(bad));
    }
    columns.push_back(std::move(col));
    dm.column_names.push_back(term.label());
  }
  for (std::size_t d = 0; d < deciles.size(); ++d) {
    std::vector<double> values(n);
    for (Eigen::Index r = 0; r < n; ++r) values[r] = deciles[d](rows[r]);
    auto buckets = decile_indicators(values);
    std::vector<bool> realized(11, false);
    for (int b : buckets) realized[b] = true;
    for (int b = 2; b <= 10; ++b) {
      if (!realized[b]) continue;
      Eigen::VectorXd col(n);
      for (Eigen::Index r = 0; r < n; ++r) col[r] = buckets[r] == b ? 1.0 : 0.0;
      columns.push_back(std::move(col));
      dm.column_names.push_back(spec.decile_terms[d] + "_d" + std::to_string(b));
    }
  }
  dm.X.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) dm.X.col(c) = columns[c];

  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    dm.factors.push_back(make_factor(spec.factors[f].name, rows, factor_levels[f]));
  }
  if (dm.factors.empty()) {
    dm.factors.push_back(make_factor("(intercept)", rows,
                                     [](const SourceRow&) { return std::string("1"); }));
  }
  for (std::size_t f = 0; f < spec.cluster_dims.size(); ++f) {
    dm.clusters.push_back(
        make_factor(spec.cluster_dims[f].name, rows, cluster_levels[f]));
  }

  // Screen for columns spanned by the absorbed factors.
  if (dm.X.cols() > 0) {
    Absorber absorber(dm.factors, Eigen::VectorXd::Ones(n));
    Eigen::MatrixXd within = dm.X;
    absorber.demean_columns(within);
    std::vector<std::string> collinear;
    for (Eigen::Index c = 0; c < within.cols(); ++c) {
      const double before = dm.X.col(c).norm();
      const double after = within.col(c).norm();
      if (before == 0.0 || after <= 1e-9 * before) {
        collinear.push_back(dm.column_names[c]);
      }
    }
    if (!collinear.empty()) {
      throw CollinearityError("column(s) constant within the absorbed factors: " +
                              join_limited(collinear));
    }
  }
  return dm;
}

DesignMatrix subset_rows(const DesignMatrix& dm, const std::vector<bool>& keep) {
  DesignMatrix out;
  out.family = dm.family;
  out.column_names = dm.column_names;
  out.n_missing_deleted = dm.n_missing_deleted;
  out.n_dropped_by_fe = dm.n_dropped_by_fe;
  std::vector<Eigen::Index> idx;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    if (keep[r]) {
      idx.push_back(static_cast<Eigen::Index>(r));
    } else {
      ++out.n_dropped_by_fe;
    }
  }
  const auto n = static_cast<Eigen::Index>(idx.size());
  out.y.resize(n);
  out.X.resize(n, dm.X.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    out.y[k] = dm.y[idx[k]];
    out.X.row(k) = dm.X.row(idx[k]);
    out.row_keys.push_back(dm.row_keys[idx[k]]);
  }
  for (const auto& f : dm.factors) out.factors.push_back(subset(f, keep));
  for (const auto& f : dm.clusters) out.clusters.push_back(subset(f, keep));
  return out;
}

}  // namespace gravnet::regress
