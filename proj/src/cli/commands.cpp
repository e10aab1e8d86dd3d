#include "gravnet/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "gravnet/cli/config.hpp"
#include "gravnet/cli/manifest.hpp"
#include "gravnet/cli/report.hpp"
#include "gravnet/cluster/hierarchical.hpp"
#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"
#include "gravnet/core/region_attributes.hpp"
#include "gravnet/core/sci_matrix.hpp"
#include "gravnet/core/stats.hpp"
#include "gravnet/ingest/crosswalk.hpp"
#include "gravnet/ingest/foreign_share.hpp"
#include "gravnet/ingest/panel.hpp"
#include "gravnet/ingest/rail.hpp"
#include "gravnet/regress/fit.hpp"

namespace gravnet::cli {

namespace fs = std::filesystem;

namespace {

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

template <class Table>
void write_table(const fs::path& path, const Table& t) {
  auto out = open_out(path);
  t.write_csv(out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

RunManifest start_manifest(const std::string& command, const std::string& canonical) {
  RunManifest m;
  m.command = command;
  m.config_hash = sha256_hex(canonical);
  m.tool_version = tool_version();
  m.timestamp = utc_timestamp();
  return m;
}

std::set<RegionId> read_universe(const fs::path& path) {
  auto t = csv::read(path);
  const auto c = t.column("region");
  std::set<RegionId> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& code = t.rows[r][c];
    if (!RegionId::is_valid(code)) {
      throw ValidationError(t.where(r) + ": malformed region code '" + code + "'");
    }
    out.insert(RegionId(code));
  }
  return out;
}

// Copies one measure of `t` into a single-measure table named `name`.
DyadTable single_measure(const DyadTable& t, std::size_t m, const std::string& name) {
  DyadTable out({name});
  for (const auto& r : t.regions()) out.add_region(r);
  for (const auto& [key, row] : t.rows()) out.insert(key, {row[m]});
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (int x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
  return s;
}

template <class E>
[[noreturn]] void rethrow_as(const std::string& prefix, const E& e) {
  throw E(prefix + e.what());
}

}  // namespace

unsigned worker_limit() {
  if (const char* env = std::getenv("GRAVNET_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void etl_rail(const EtlRailOptions& opt, std::ostream* log) {
  auto reports = ingest::read_rail_csv(opt.raw);
  if (reports.empty()) throw ValidationError("no reports in '" + opt.raw.string() + "'");
  prepare_out(opt.out);

  std::ostringstream canonical;
  canonical << "etl-rail\nraw=" << opt.raw.string()
            << "\ncrosswalk=" << (opt.crosswalk ? opt.crosswalk->string() : "")
            << "\nuniverse=" << (opt.universe ? opt.universe->string() : "") << "\n";
  auto manifest = start_manifest("etl-rail", canonical.str());
  manifest.add_input(opt.raw);

  std::optional<ingest::Crosswalk> cw;
  if (opt.crosswalk) {
    cw = ingest::Crosswalk::read_csv(*opt.crosswalk);
    manifest.add_input(*opt.crosswalk);
  }
  std::optional<std::set<RegionId>> fixed_universe;
  if (opt.universe) {
    fixed_universe = read_universe(*opt.universe);
    manifest.add_input(*opt.universe);
  }

  const auto availability = ingest::build_availability(reports);
  std::set<int> years;
  for (const auto& r : reports) years.insert(r.year);

  std::map<int, DyadTable> panel;
  for (int year : years) {
    std::vector<ingest::RailReport> subset;
    for (const auto& r : reports) {
      if (r.year == year) subset.push_back(r);
    }
    const auto universe = fixed_universe ? *fixed_universe : ingest::regions_reported(reports, year);
    DyadTable clean = ingest::clean_rail(subset, availability, universe);
    if (cw) clean = ingest::apply_crosswalk(clean, cw->with_identity_for(clean.regions()));
    write_table(opt.out / ("rail_clean_" + std::to_string(year) + ".csv"), clean);
    panel.emplace(year, single_measure(clean, 0, "passengers"));
    if (log) *log << "year " << year << ": " << clean.size() << " pairs\n";
  }
  write_table(opt.out / "rail_most_recent.csv",
              ingest::most_recent_year(panel, "passengers", true));
  write_table(opt.out / "availability.csv", availability);
  manifest.write(opt.out);
}

void cluster(const ClusterOptions& opt, std::ostream* log) {
  if (opt.k.empty()) throw ValidationError("--k needs at least one value");
  for (int k : opt.k) {
    if (k < 1) throw ValidationError("--k values must be >= 1 (got " + std::to_string(k) + ")");
  }
  auto table = DyadTable::read_csv(opt.sci);
  auto sci = SciMatrix::from_dyads(table, opt.measure);
  for (int k : opt.k) {
    if (static_cast<std::size_t>(k) > sci.size()) {
      throw ValidationError("--k " + std::to_string(k) + " exceeds the " +
                            std::to_string(sci.size()) + " regions");
    }
  }
  prepare_out(opt.out);
  auto manifest = start_manifest(
      "cluster", "cluster\nsci=" + opt.sci.string() + "\nmeasure=" + opt.measure +
                     "\nk=" + join_ints(opt.k) + "\n");
  manifest.add_input(opt.sci);

  auto tree = cluster::agglomerate(cluster::build_distance(sci));
  {
    auto out = open_out(opt.out / "merge_tree.csv");
    tree.write_csv(out);
  }
  {
    auto out = open_out(opt.out / "leaves.csv");
    tree.write_leaves_csv(out);
  }
  if (log && !tree.inversions().empty()) {
    *log << "note: " << tree.inversions().size() << " merge height inversion(s)\n";
  }
  std::vector<int> ks = opt.k;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (int k : ks) {
    auto out = open_out(opt.out / ("assignment_k" + std::to_string(k) + ".csv"));
    cluster::cut(tree, k).write_csv(out);
  }
  if (log) *log << sci.size() << " regions clustered; cuts at k=" << join_ints(ks) << "\n";
  manifest.write(opt.out);
}

void fit(const FitOptions& opt, std::ostream* log) {
  const auto cfg = read_fit_config(opt.config);
  auto manifest = start_manifest("fit", file_sha256(opt.config));
  manifest.config_hash = file_sha256(opt.config);
  manifest.add_input(opt.config);

  std::map<fs::path, DyadTable> dyads;
  std::map<fs::path, RegionTable> regions;
  for (const auto& col : cfg.columns) {
    if (col.data && !dyads.contains(*col.data)) {
      dyads.emplace(*col.data, DyadTable::read_csv(*col.data));
      manifest.add_input(*col.data);
    }
    if (col.attributes && !regions.contains(*col.attributes)) {
      regions.emplace(*col.attributes, RegionTable::read_csv(*col.attributes));
      manifest.add_input(*col.attributes);
    }
  }
  prepare_out(opt.out);

  const std::size_t n_cols = cfg.columns.size();
  std::vector<std::optional<regress::FitResult>> fits(n_cols);
  std::vector<std::exception_ptr> errors(n_cols);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < n_cols; c = next++) {
      const auto& col = cfg.columns[c];
      const std::string prefix = "column " + col.name + ": ";
      try {
        try {
          regress::DataSource data;
          if (col.data) data.dyads = &dyads.at(*col.data);
          if (col.attributes) data.regions = &regions.at(*col.attributes);
          fits[c] = regress::fit_model(data, col.spec);
        } catch (const CollinearityError& e) {
          rethrow_as(prefix, e);
        } catch (const ValidationError& e) {
          rethrow_as(prefix, e);
        } catch (const DegenerateModelError& e) {
          rethrow_as(prefix, e);
        }
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_limit(), n_cols));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ColumnResult> results;
  for (std::size_t c = 0; c < n_cols; ++c) {
    results.push_back({cfg.columns[c].name, cfg.columns[c].spec, std::move(*fits[c])});
  }
  write_text(opt.out / "fit.json", results_json(cfg.title, results));
  const std::string table = results_table(cfg.title, results);
  write_text(opt.out / "fit_table.txt", table);
  for (std::size_t c = 0; c < n_cols; ++c) {
    auto out = open_out(opt.out / ("residuals_" + std::to_string(c + 1) + ".csv"));
    write_residuals_csv(out, results[c].fit);
  }
  if (log) {
    *log << table;
    for (const auto& r : results) {
      for (const auto& w : r.fit.diagnostics.warnings) {
        *log << "warning (column " << r.name << "): " << w << "\n";
      }
    }
  }
  manifest.write(opt.out);
}

void foreign_share(const ForeignShareOptions& opt, std::ostream* log) {
  auto sci = SciMatrix::from_dyads(DyadTable::read_csv(opt.sci), opt.measure);
  auto weights = RegionTable::read_csv(opt.weights);
  auto shares = ingest::foreign_share(sci, weights, opt.weight_column);
  prepare_out(opt.out);
  auto manifest = start_manifest(
      "foreign-share", "foreign-share\nsci=" + opt.sci.string() + "\nmeasure=" + opt.measure +
                           "\nweights=" + opt.weights.string() +
                           "\nweight_column=" + opt.weight_column + "\n");
  manifest.add_input(opt.sci);
  manifest.add_input(opt.weights);
  auto out = open_out(opt.out / "foreign_share.csv");
  csv::write_row(out, {"region", "foreign_share"});
  for (const auto& [region, share] : shares) {
    csv::write_row(out, {region.code(), csv::format_number(share)});
  }
  if (!out) throw IoError("write failed for foreign_share.csv");
  if (log) *log << shares.size() << " regions\n";
  manifest.write(opt.out);
}

void correlate(const CorrelateOptions& opt, std::ostream* log) {
  const auto& m = opt.measures;
  if (m.size() < 2) throw ValidationError("--measures needs at least two names");
  if (opt.inputs.size() != 1 && opt.inputs.size() != m.size()) {
    throw ValidationError("give one --input for all measures or one per measure");
  }
  std::map<fs::path, DyadTable> tables;
  for (const auto& p : opt.inputs) {
    if (!tables.contains(p)) tables.emplace(p, DyadTable::read_csv(p));
  }
  auto table_of = [&](std::size_t k) -> const DyadTable& {
    return tables.at(opt.inputs.size() == 1 ? opt.inputs[0] : opt.inputs[k]);
  };
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m.size()),
                                                static_cast<Eigen::Index>(m.size()));
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = a + 1; b < m.size(); ++b) {
      const double v = correlate_measures(table_of(a), m[a], table_of(b), m[b]);
      r(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      r(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  }
  prepare_out(opt.out);
  std::string canonical = "correlate\n";
  for (const auto& p : opt.inputs) canonical += "input=" + p.string() + "\n";
  for (const auto& name : m) canonical += "measure=" + name + "\n";
  auto manifest = start_manifest("correlate", canonical);
  for (const auto& [p, t] : tables) manifest.add_input(p);

  auto out = open_out(opt.out / "correlation.csv");
  std::vector<std::string> header{"measure"};
  header.insert(header.end(), m.begin(), m.end());
  csv::write_row(out, header);
  for (std::size_t a = 0; a < m.size(); ++a) {
    std::vector<std::string> row{m[a]};
    for (std::size_t b = 0; b < m.size(); ++b) {
      row.push_back(csv::format_number(
          r(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
    }
    csv::write_row(out, row);
  }
  if (log) {
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f",
                      r(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        *log << m[a] << " ~ " << m[b] << ": " << buf << "\n";
      }
    }
  }
  manifest.write(opt.out);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dyadic network econometrics: rail ETL, SCI clustering, gravity fits",
               "gravnet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());
  bool quiet = false;
  app.add_flag("--quiet", quiet, "Suppress progress output");

  EtlRailOptions etl_opt;
  std::string crosswalk, universe;
  auto* etl_cmd = app.add_subcommand("etl-rail", "Clean raw rail reports into per-year tables");
  etl_cmd->add_option("--raw", etl_opt.raw, "reporter,year,i,j,passengers CSV")->required();
  etl_cmd->add_option("--crosswalk", crosswalk, "old,new,population_share CSV");
  etl_cmd->add_option("--universe", universe, "CSV with a region column");
  etl_cmd->add_option("--out", etl_opt.out, "Output directory")->required();

  ClusterOptions cluster_opt;
  auto* cluster_cmd = app.add_subcommand("cluster", "Average-linkage clustering on 1/SCI");
  cluster_cmd->add_option("--sci", cluster_opt.sci, "i,j,<sci> CSV")->required();
  cluster_cmd->add_option("--measure", cluster_opt.measure, "SCI column name")
      ->capture_default_str();
  cluster_cmd->add_option("--k", cluster_opt.k, "Comma-separated cut levels")
      ->required()
      ->delimiter(',');
  cluster_cmd->add_option("--out", cluster_opt.out, "Output directory")->required();

  FitOptions fit_opt;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the OLS / PPML columns of a model config");
  fit_cmd->add_option("--config", fit_opt.config, "Model config file")->required();
  fit_cmd->add_option("--out", fit_opt.out, "Output directory")->required();

  ForeignShareOptions fs_opt;
  auto* fs_cmd = app.add_subcommand("foreign-share", "Share of connections to other countries");
  fs_cmd->add_option("--sci", fs_opt.sci, "i,j,<sci> CSV with the diagonal")->required();
  fs_cmd->add_option("--measure", fs_opt.measure, "SCI column name")->capture_default_str();
  fs_cmd->add_option("--weights", fs_opt.weights, "region,<weight> CSV")->required();
  fs_cmd->add_option("--weight-column", fs_opt.weight_column, "Weight attribute")
      ->capture_default_str();
  fs_cmd->add_option("--out", fs_opt.out, "Output directory")->required();

  CorrelateOptions corr_opt;
  auto* corr_cmd = app.add_subcommand("correlate", "Pairwise correlations of dyadic measures");
  corr_cmd->add_option("--input", corr_opt.inputs, "Dyad CSV (repeat per measure)")->required();
  corr_cmd->add_option("--measures", corr_opt.measures, "Comma-separated measure names")
      ->required()
      ->delimiter(',');
  corr_cmd->add_option("--out", corr_opt.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  std::ostream* log = quiet ? nullptr : &out;
  try {
    if (*etl_cmd) {
      if (!crosswalk.empty()) etl_opt.crosswalk = crosswalk;
      if (!universe.empty()) etl_opt.universe = universe;
      etl_rail(etl_opt, log);
    } else if (*cluster_cmd) {
      cluster(cluster_opt, log);
    } else if (*fit_cmd) {
      fit(fit_opt, log);
    } else if (*fs_cmd) {
      foreign_share(fs_opt, log);
    } else if (*corr_cmd) {
      correlate(corr_opt, log);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DegenerateModelError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

}  // namespace gravnet::cli
