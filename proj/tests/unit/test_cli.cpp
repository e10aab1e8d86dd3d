#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "gravnet/cli/commands.hpp"
#include "gravnet/cli/config.hpp"
#include "gravnet/cli/manifest.hpp"
#include "gravnet/core/errors.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace gravnet;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() /
           ("gravnet_cli_" + std::to_string(rd()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    setenv("GRAVNET_THREADS", "2", 1);
  }
  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return dir_ / name;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "gravnet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kFourPoints =
    "i,j,sci\n"
    "AA1,AB1,1\nAA1,AC1,0.1\nAA1,AD1,0.1\n"
    "AB1,AC1,0.1\nAB1,AD1,0.1\nAC1,AD1,1\n";

std::string gravity_csv(const DyadTable& t) {
  std::ostringstream s;
  t.write_csv(s);
  return s.str();
}

}  // namespace

TEST_F(CliTest, EtlRailAveragesDualReportsAndSkipsUnreportedGroups) {
  auto raw = write("raw.csv",
                   "reporter,year,i,j,passengers\n"
                   "DE,2015,DE21,PL11,100\n"
                   "PL,2015,DE21,PL11,200\n"
                   "DE,2015,DE21,DE22,40\n"
                   "FR,2015,FR10,FR20,\n"
                   "FR,2015,FR10,DE21,\n");
  auto universe = write("universe.csv", "region\nDE21\nDE22\nPL11\nFR10\nFR20\n");
  ASSERT_EQ(run({"--quiet", "etl-rail", "--raw", raw.string(), "--universe", universe.string(),
                 "--out", (dir_ / "out").string()}),
            0)
      << err_.str();
  auto clean = DyadTable::read_csv(dir_ / "out" / "rail_clean_2015.csv");
  const auto m = clean.measure_index("passengers_2015");
  EXPECT_DOUBLE_EQ(clean.value(RegionId("DE21"), RegionId("PL11"), m), 150.0);
  EXPECT_DOUBLE_EQ(clean.value(RegionId("PL11"), RegionId("DE21"), m), 0.0);
  // FR submitted only missing rows. Its domestic pairs have no other
  // reporter; pairs with DE fall in DE's available international group.
  EXPECT_DOUBLE_EQ(clean.value(RegionId("DE21"), RegionId("FR10"), m), 0.0);
  EXPECT_FALSE(clean.contains(RegionId("FR10"), RegionId("FR20")));
  EXPECT_FALSE(clean.contains(RegionId("FR20"), RegionId("FR10")));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "rail_most_recent.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "availability.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "manifest.json"));
}

TEST_F(CliTest, EtlRailRejectsEmptyInput) {
  auto raw = write("raw.csv", "reporter,year,i,j,passengers\n");
  EXPECT_EQ(run({"etl-rail", "--raw", raw.string(), "--out", (dir_ / "out").string()}),
            cli::kExitValidation);
  EXPECT_NE(err_.str().find("no reports"), std::string::npos);
}

TEST_F(CliTest, ClusterWritesTreeAndCuts) {
  auto sci = write("sci.csv", kFourPoints);
  const auto out = dir_ / "out";
  ASSERT_EQ(run({"--quiet", "cluster", "--sci", sci.string(), "--k", "1,2,4", "--out",
                 out.string()}),
            0)
      << err_.str();
  EXPECT_EQ(slurp(out / "merge_tree.csv"),
            "step,left,right,height,new_id\n1,0,1,1,4\n2,2,3,1,5\n3,4,5,10,6\n");
  EXPECT_EQ(slurp(out / "assignment_k2.csv"), "region,community\nAA1,1\nAB1,1\nAC1,2\nAD1,2\n");
  EXPECT_EQ(slurp(out / "assignment_k4.csv"), "region,community\nAA1,1\nAB1,2\nAC1,3\nAD1,4\n");
  EXPECT_EQ(slurp(out / "assignment_k1.csv"), "region,community\nAA1,1\nAB1,1\nAC1,1\nAD1,1\n");
}

TEST_F(CliTest, ClusterRejectsBadK) {
  auto sci = write("sci.csv", kFourPoints);
  const auto out = (dir_ / "out").string();
  EXPECT_EQ(run({"cluster", "--sci", sci.string(), "--k", "0", "--out", out}),
            cli::kExitValidation);
  EXPECT_EQ(run({"cluster", "--sci", sci.string(), "--k", "5", "--out", out}),
            cli::kExitValidation);
  EXPECT_EQ(run({"cluster", "--sci", sci.string(), "--k", "two", "--out", out}),
            cli::kExitValidation);
}

TEST_F(CliTest, MissingMeasureAndMissingFile) {
  auto sci = write("sci.csv", kFourPoints);
  const auto out = (dir_ / "out").string();
  EXPECT_EQ(run({"cluster", "--sci", sci.string(), "--measure", "friends", "--k", "2", "--out",
                 out}),
            cli::kExitValidation);
  EXPECT_NE(err_.str().find("friends"), std::string::npos);
  EXPECT_EQ(run({"cluster", "--sci", (dir_ / "nope.csv").string(), "--k", "2", "--out", out}),
            cli::kExitIo);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), cli::kExitValidation);
  EXPECT_EQ(run({"frobnicate"}), cli::kExitValidation);
  EXPECT_EQ(run({"cluster", "--k", "2"}), cli::kExitValidation);
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("cluster"), std::string::npos);
}

TEST_F(CliTest, NestedOlsColumnsHaveNonDecreasingR2) {
  auto g = oracle::simulate_gravity(14, 0.8, -0.4, 11);
  write("flows.csv", gravity_csv(g.table));
  auto cfg = write("model.cfg",
                   "title = nested\n"
                   "family = ols\n"
                   "data = flows.csv\n"
                   "outcome = flow\n"
                   "[column 1]\nterms = x1\n"
                   "[column 2]\nterms = x1, x2\n"
                   "[column 3]\nterms = x1, x2\nfactors = origin\n"
                   "[column 4]\nterms = x1, x2\nfactors = origin, destination\n"
                   "cluster = origin, destination\n");
  const auto out = dir_ / "out";
  ASSERT_EQ(run({"--quiet", "fit", "--config", cfg.string(), "--out", out.string()}), 0)
      << err_.str();
  auto j = nlohmann::json::parse(slurp(out / "fit.json"));
  ASSERT_EQ(j["columns"].size(), 4u);
  double prev = -1.0;
  for (const auto& col : j["columns"]) {
    const double r2 = col["fit_stat"].get<double>();
    EXPECT_GE(r2, prev - 1e-12);
    prev = r2;
  }
  EXPECT_EQ(j["columns"][3]["diagnostics"]["vcov_type"].get<std::string>().empty(), false);
  for (int c = 1; c <= 4; ++c) {
    EXPECT_TRUE(fs::exists(out / ("residuals_" + std::to_string(c) + ".csv")));
  }
  const auto table = slurp(out / "fit_table.txt");
  EXPECT_NE(table.find("x2"), std::string::npos);
  EXPECT_NE(table.find("origin+destination"), std::string::npos);
}

TEST_F(CliTest, PpmlColumnMatchesDummyNewton) {
  auto g = oracle::simulate_gravity(12, 1.5, -0.5, 5);
  write("flows.csv", gravity_csv(g.table));
  auto cfg = write("ppml.cfg",
                   "family = ppml\ndata = flows.csv\noutcome = flow\nterms = x1, x2\n"
                   "factors = origin, destination\n");
  const auto out = dir_ / "out";
  ASSERT_EQ(run({"--quiet", "fit", "--config", cfg.string(), "--out", out.string()}), 0)
      << err_.str();

  const auto& t = g.table;
  const auto f = t.measure_index("flow"), a = t.measure_index("x1"), b = t.measure_index("x2");
  std::map<RegionId, int> id;
  for (const auto& r : t.regions()) id.emplace(r, static_cast<int>(id.size()));
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, 2);
  std::vector<std::vector<int>> fac(2, std::vector<int>(static_cast<std::size_t>(n)));
  Eigen::Index r = 0;
  for (const auto& [key, row] : t.rows()) {
    y[r] = row[f];
    X(r, 0) = row[a];
    X(r, 1) = row[b];
    fac[0][static_cast<std::size_t>(r)] = id.at(key.origin);
    fac[1][static_cast<std::size_t>(r)] = id.at(key.destination);
    ++r;
  }
  auto newton = oracle::dummy_ppml_newton(y, X, fac);
  auto j = nlohmann::json::parse(slurp(out / "fit.json"));
  const auto& col = j["columns"][0];
  EXPECT_TRUE(col["converged"].get<bool>());
  EXPECT_NEAR(col["coefficients"]["x1"].get<double>(), newton.beta[0], 1e-6);
  EXPECT_NEAR(col["coefficients"]["x2"].get<double>(), newton.beta[1], 1e-6);
}

TEST_F(CliTest, FitReportsBadConfigWithLine) {
  write("flows.csv", "i,j,flow,x1\nAA1,AB1,1,2\n");
  auto cfg = write("bad.cfg", "data = flows.csv\noutcome = flow\nterms = x1\ncolour = red\n");
  EXPECT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "out").string()}),
            cli::kExitValidation);
  EXPECT_NE(err_.str().find("bad.cfg:4"), std::string::npos);
}

TEST_F(CliTest, FitColumnErrorNamesColumn) {
  write("flows.csv", "i,j,flow,x1\nAA1,AB1,1,2\nAB1,AA1,2,3\nAA1,AC1,3,1\n");
  auto cfg = write("m.cfg",
                   "data = flows.csv\noutcome = flow\n"
                   "[column good]\nterms = x1\n[column bad]\nterms = x9\n");
  EXPECT_EQ(run({"fit", "--config", cfg.string(), "--out", (dir_ / "out").string()}),
            cli::kExitValidation);
  EXPECT_NE(err_.str().find("column bad"), std::string::npos);
}

TEST_F(CliTest, OutputsAreByteIdenticalAcrossRuns) {
  auto g = oracle::simulate_gravity(10, 1.0, 0.5, 3);
  write("flows.csv", gravity_csv(g.table));
  auto cfg = write("m.cfg",
                   "data = flows.csv\noutcome = flow\n"
                   "[column ols]\nterms = x1, x2\nfactors = origin\ncluster = origin\n"
                   "[column ppml]\nfamily = ppml\nterms = x1, x2\nfactors = origin, destination\n");
  for (const char* d : {"a", "b"}) {
    ASSERT_EQ(run({"--quiet", "fit", "--config", cfg.string(), "--out", (dir_ / d).string()}), 0)
        << err_.str();
  }
  setenv("GRAVNET_THREADS", "1", 1);
  ASSERT_EQ(run({"--quiet", "fit", "--config", cfg.string(), "--out", (dir_ / "c").string()}), 0);
  for (const char* f : {"fit.json", "fit_table.txt", "residuals_1.csv", "residuals_2.csv",
                        "manifest.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "c" / f)) << f;
  }
}

TEST_F(CliTest, ManifestRecordsDigests) {
  auto sci = write("sci.csv", kFourPoints);
  ASSERT_EQ(run({"--quiet", "cluster", "--sci", sci.string(), "--k", "2", "--out",
                 (dir_ / "out").string()}),
            0);
  auto j = nlohmann::json::parse(slurp(dir_ / "out" / "manifest.json"));
  EXPECT_EQ(j["command"], "cluster");
  EXPECT_EQ(j["input_digests"][sci.string()], cli::file_sha256(sci));
  EXPECT_EQ(j["timestamp"], "2023-11-14T22:13:20Z");
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 64u);
}

TEST_F(CliTest, ForeignShareAndCorrelate) {
  auto sci = write("sci.csv",
                   "i,j,sci,twice\n"
                   "AA1,AA1,4,8\nAA1,AB1,1,2\nAA1,BA1,1,2\n"
                   "AB1,AB1,4,8\nAB1,BA1,2,4\nBA1,BA1,9,18\n");
  auto w = write("users.csv", "region,users\nAA1,10\nAB1,20\nBA1,5\n");
  ASSERT_EQ(run({"--quiet", "foreign-share", "--sci", sci.string(), "--weights", w.string(),
                 "--out", (dir_ / "fs").string()}),
            0)
      << err_.str();
  const auto shares = slurp(dir_ / "fs" / "foreign_share.csv");
  EXPECT_EQ(shares.rfind("region,foreign_share\n", 0), 0u);
  EXPECT_NE(shares.find("BA1,"), std::string::npos);

  ASSERT_EQ(run({"--quiet", "correlate", "--input", sci.string(), "--measures", "sci,twice",
                 "--out", (dir_ / "corr").string()}),
            0)
      << err_.str();
  EXPECT_EQ(slurp(dir_ / "corr" / "correlation.csv"),
            "measure,sci,twice\nsci,1,1\ntwice,1,1\n");
  EXPECT_EQ(run({"correlate", "--input", sci.string(), "--measures", "sci", "--out",
                 (dir_ / "corr").string()}),
            cli::kExitValidation);
}

TEST(CliConfig, SectionsOverrideDefaults) {
  std::istringstream in(
      "title = T\nfamily = ppml\ndata = d.csv\noutcome = y\nterms = log(x)\n"
      "[column A]\n[column B]\nfamily = ols\nfactors = origin, destination # comment\n");
  auto cfg = cli::parse_fit_config(in, "cfg", "/base");
  ASSERT_EQ(cfg.columns.size(), 2u);
  EXPECT_EQ(cfg.title, "T");
  EXPECT_EQ(cfg.columns[0].spec.family, regress::Family::ppml);
  EXPECT_EQ(cfg.columns[1].spec.family, regress::Family::ols);
  EXPECT_EQ(cfg.columns[1].spec.factors.size(), 2u);
  EXPECT_EQ(*cfg.columns[0].data, fs::path("/base/d.csv"));
  EXPECT_EQ(cfg.columns[0].spec.continuous_terms[0].measure, "x");
}

TEST(CliConfig, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return cli::parse_fit_config(in, "cfg", ".");
  };
  EXPECT_THROW(parse("outcome = y\nterms = x\n"), ValidationError);
  EXPECT_THROW(parse("data = d\nterms = x\n"), ValidationError);
  EXPECT_THROW(parse("data = d\noutcome = y\n"), ValidationError);
  EXPECT_THROW(parse("data = d\noutcome = y\nterms = x\nfamily = logit\n"), ValidationError);
  EXPECT_THROW(parse("data = d\ndata = e\n"), ValidationError);
  EXPECT_THROW(parse("[model]\n"), ValidationError);
  EXPECT_THROW(parse("data = d\noutcome = y\nterms = x\n[column a]\n[column a]\n"),
               ValidationError);
}

TEST(CliManifest, Sha256KnownAnswer) {
  EXPECT_EQ(cli::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
