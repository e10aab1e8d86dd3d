#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"
#include "gravnet/ingest/crosswalk.hpp"
#include "gravnet/ingest/foreign_share.hpp"
#include "gravnet/ingest/panel.hpp"
#include "gravnet/ingest/rail.hpp"
#include "support/oracles.hpp"

namespace gravnet::ingest {
namespace {

RegionId R(const char* code) { return RegionId(code); }

RailReport rep(const char* reporter, int year, const char* i, const char* j, double v) {
  return RailReport{reporter, year, R(i), R(j), v, 0};
}

const std::set<RegionId> kUniverse{R("DE21"), R("DE22"), R("PL11"), R("PL12"),
                                   R("FR10"), R("LU")};

std::vector<RailReport> fixture() {
  return {
      rep("DE", 2005, "DE21", "PL11", 100.0),
      rep("PL", 2005, "DE21", "PL11", 200.0),
      rep("DE", 2005, "DE21", "DE22", 40.0),
      rep("DE", 2005, "DE22", "PL12", kMissing),
      rep("FR", 2005, "FR10", "DE21", kMissing),
      rep("FR", 2005, "FR10", "PL11", kMissing),
      rep("DE", 2005, "DEXX", "PL11", 7.0),
      rep("PL", 2005, "PL11", "ZZ", 9.0),
  };
}

double passengers(const DyadTable& t, const char* i, const char* j, int year) {
  return t.value(R(i), R(j), t.measure_index(passengers_measure(year)));
}

TEST(Availability, Examples) {
  auto a = build_availability(fixture());
  EXPECT_TRUE(a.available("DE", 2005, Scope::international));
  EXPECT_TRUE(a.available("DE", 2005, Scope::domestic));
  EXPECT_FALSE(a.available("FR", 2005, Scope::international));
  EXPECT_FALSE(a.available("FR", 2010, Scope::domestic));
  EXPECT_FALSE(a.available("XX", 2010, Scope::domestic));
  EXPECT_FALSE(a.available("PL", 2005, Scope::domestic));
}

TEST(Availability, CsvLayout) {
  auto a = build_availability(fixture());
  std::ostringstream out;
  a.write_csv(out);
  EXPECT_EQ(out.str().substr(0, 30), "reporter,year,scope,available\n");
  EXPECT_NE(out.str().find("FR,2005,international,0"), std::string::npos);
}

TEST(CleanRail, DualReportAverage) {
  auto reports = fixture();
  auto clean = clean_rail(reports, build_availability(reports), kUniverse);
  EXPECT_EQ(passengers(clean, "DE21", "PL11", 2005), 150.0);
}

TEST(CleanRail, AvailableGroupZeroFill) {
  auto reports = fixture();
  auto clean = clean_rail(reports, build_availability(reports), kUniverse);
  // Domestic pair with no row inside an available group.
  EXPECT_EQ(passengers(clean, "DE22", "DE21", 2005), 0.0);
  EXPECT_EQ(passengers(clean, "DE21", "DE22", 2005), 40.0);
  // Missing value reported inside an available group.
  EXPECT_EQ(passengers(clean, "DE22", "PL12", 2005), 0.0);
  // Reverse direction of a reported pair, both reporters available.
  EXPECT_EQ(passengers(clean, "PL11", "DE21", 2005), 0.0);
}

TEST(CleanRail, UnavailableGroupExcluded) {
  auto reports = fixture();
  auto clean = clean_rail(reports, build_availability(reports), kUniverse);
  // FR submitted nothing; pairs whose only possible reporter is FR are absent.
  EXPECT_FALSE(clean.contains(R("FR10"), R("LU")));
  EXPECT_FALSE(clean.contains(R("LU"), R("FR10")));
  // FR-DE pairs fall back on DE's inferred zero.
  EXPECT_EQ(passengers(clean, "FR10", "DE21", 2005), 0.0);
  // PL domestic group is unavailable.
  EXPECT_FALSE(clean.contains(R("PL11"), R("PL12")));
}

TEST(CleanRail, PlaceholdersExcluded) {
  auto reports = fixture();
  auto clean = clean_rail(reports, build_availability(reports), kUniverse);
  for (const auto& [key, row] : clean.rows()) {
    EXPECT_FALSE(key.origin.is_placeholder());
    EXPECT_FALSE(key.destination.is_placeholder());
  }
  // The DEXX row did not leak into any DE pair.
  EXPECT_EQ(passengers(clean, "DE22", "PL11", 2005), 0.0);
}

TEST(CleanRail, SingleRegionCountryCode) {
  std::vector<RailReport> reports{rep("LU", 2010, "LU", "DE21", 30.0),
                                  rep("DE", 2010, "DE21", "DE", 5.0)};
  auto clean = clean_rail(reports, build_availability(reports), kUniverse);
  EXPECT_EQ(passengers(clean, "LU", "DE21", 2010), 30.0);
  // "DE" has two regions in the universe and is dropped.
  for (const auto& [key, row] : clean.rows()) EXPECT_NE(key.destination.code(), "DE");
}

TEST(CleanRail, Errors) {
  std::vector<RailReport> neg{rep("DE", 2005, "DE21", "PL11", -1.0)};
  EXPECT_THROW(clean_rail(neg, build_availability(neg), kUniverse), ValidationError);
  std::vector<RailReport> stranger{rep("FR", 2005, "DE21", "PL11", 1.0)};
  EXPECT_THROW(clean_rail(stranger, build_availability(stranger), kUniverse),
               ValidationError);
  std::vector<RailReport> twice{rep("DE", 2005, "DE21", "PL11", 1.0),
                                rep("DE", 2005, "DE21", "PL11", 2.0)};
  EXPECT_THROW(clean_rail(twice, build_availability(twice), kUniverse), ValidationError);
}

TEST(CleanRail, ReadCsvRowAddressedErrors) {
  std::istringstream ok("reporter,year,i,j,passengers\nDE,2005,DE21,PL11,100\nPL,2005,DE21,PL11,\n");
  auto reports = read_rail_csv(ok, "mem");
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_TRUE(is_missing(reports[1].passengers));
  EXPECT_EQ(reports[1].source_line, 3u);
  std::istringstream bad_year("reporter,year,i,j,passengers\nDE,2006,DE21,PL11,1\n");
  try {
    read_rail_csv(bad_year, "mem");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("mem:2"), std::string::npos);
  }
  std::istringstream negative("reporter,year,i,j,passengers\nDE,2005,DE21,PL11,-3\n");
  EXPECT_THROW(read_rail_csv(negative, "mem"), ValidationError);
}

TEST(CleanRail, Idempotent) {
  auto reports = fixture();
  reports.push_back(rep("DE", 2015, "DE21", "PL12", 12.0));
  reports.push_back(rep("PL", 2015, "PL12", "PL11", 8.0));
  auto availability = build_availability(reports);
  auto clean = clean_rail(reports, availability, kUniverse);
  auto again = clean_rail(reports_from_clean(clean, availability), availability, kUniverse);
  EXPECT_TRUE(again == clean);
}

TEST(Crosswalk, ProportionalSplit) {
  Crosswalk cw({{R("DE41"), R("DE40"), 1.0},
                {R("UKI1"), R("UKI3"), 0.6},
                {R("UKI1"), R("UKI4"), 0.4}});
  DyadTable flows({"trips"});
  flows.insert(R("DE41"), R("UKI1"), {1000.0});
  auto out = apply_crosswalk(flows, cw);
  EXPECT_NEAR(out.value(R("DE40"), R("UKI3"), 0), 600.0, 1e-9);
  EXPECT_NEAR(out.value(R("DE40"), R("UKI4"), 0), 400.0, 1e-9);
  EXPECT_EQ(out.size(), 2u);
}

TEST(Crosswalk, IdentityIsNoOp) {
  DyadTable flows({"a", "b"});
  flows.insert(R("DE21"), R("PL11"), {3.5, kMissing});
  flows.insert(R("PL11"), R("DE21"), {0.0, 2.0});
  auto out = apply_crosswalk(flows, Crosswalk::identity(flows.regions()));
  EXPECT_TRUE(out == flows);
}

TEST(Crosswalk, TwoWaySplitConservesFlow) {
  Crosswalk cw({{R("AA1"), R("AA2"), 0.3},
                {R("AA1"), R("AA3"), 0.7},
                {R("BB1"), R("BB2"), 0.55},
                {R("BB1"), R("BB3"), 0.45}});
  DyadTable flows({"trips"});
  flows.insert(R("AA1"), R("BB1"), {1234.5});
  auto out = apply_crosswalk(flows, cw);
  ASSERT_EQ(out.size(), 4u);
  double total = 0.0;
  for (const auto& [k, row] : out.rows()) total += row[0];
  EXPECT_NEAR(total, 1234.5, 1234.5 * 1e-9);
}

TEST(Crosswalk, MergesAndMissing) {
  // Two old regions merge into one new region.
  Crosswalk cw({{R("AA1"), R("AA9"), 1.0}, {R("AA2"), R("AA9"), 1.0},
                {R("BB1"), R("BB1"), 1.0}});
  DyadTable flows({"v"});
  flows.insert(R("AA1"), R("BB1"), {5.0});
  flows.insert(R("AA2"), R("BB1"), {kMissing});
  flows.insert(R("BB1"), R("AA1"), {kMissing});
  flows.insert(R("BB1"), R("AA2"), {kMissing});
  auto out = apply_crosswalk(flows, cw);
  EXPECT_EQ(out.value(R("AA9"), R("BB1"), 0), 5.0);
  EXPECT_TRUE(out.contains(R("BB1"), R("AA9")));
  EXPECT_TRUE(is_missing(out.value(R("BB1"), R("AA9"), 0)));
}

TEST(Crosswalk, Validation) {
  EXPECT_THROW(Crosswalk({{R("AA1"), R("AA2"), 0.5}}), ValidationError);
  EXPECT_THROW(Crosswalk({{R("AA1"), R("AA2"), 1.2}, {R("AA1"), R("AA3"), -0.2}}),
               ValidationError);
  DyadTable flows({"v"});
  flows.insert(R("AA1"), R("CC7"), {1.0});
  try {
    apply_crosswalk(flows, Crosswalk({{R("AA1"), R("AA1"), 1.0}}));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("CC7"), std::string::npos);
  }
  std::istringstream in("old,new,population_share\nAA1,AA2,0.25\nAA1,AA3,0.75\n");
  auto parsed = Crosswalk::parse_csv(in, "mem");
  ASSERT_NE(parsed.targets(R("AA1")), nullptr);
  EXPECT_EQ(parsed.targets(R("AA1"))->size(), 2u);
}

TEST(Panel, MostRecentYear) {
  DyadTable wide({"passengers_2005", "passengers_2010", "passengers_2015"});
  wide.insert(R("AA1"), R("BB1"), {1.0, kMissing, 3.0});
  wide.insert(R("AA1"), R("CC1"), {kMissing, 2.0, kMissing});
  wide.insert(R("BB1"), R("CC1"), {kMissing, kMissing, kMissing});
  auto panel = split_years(wide, "passengers_", "passengers");
  ASSERT_EQ(panel.size(), 3u);
  auto recent = most_recent_year(panel, "passengers", true);
  EXPECT_EQ(recent.value(R("AA1"), R("BB1"), 0), 3.0);
  EXPECT_EQ(recent.value(R("AA1"), R("BB1"), 1), 2015.0);
  EXPECT_EQ(recent.value(R("AA1"), R("CC1"), 0), 2.0);
  EXPECT_FALSE(recent.contains(R("BB1"), R("CC1")));
}

SciMatrix four_region_sci() {
  Eigen::MatrixXd v(4, 4);
  v << 50.0, 8.0, 2.0, 1.0,
       8.0, 40.0, 3.0, 0.5,
       2.0, 3.0, 30.0, 6.0,
       1.0, 0.5, 6.0, 25.0;
  return SciMatrix({R("AT11"), R("AT12"), R("DE21"), R("FR10")}, v);
}

RegionTable weights(std::vector<double> w) {
  RegionTable t({"users"});
  const char* codes[] = {"AT11", "AT12", "DE21", "FR10"};
  for (std::size_t k = 0; k < w.size(); ++k) t.insert({R(codes[k]), {{"users", w[k]}}});
  return t;
}

TEST(ForeignShare, MatchesDirectSummation) {
  auto sci = four_region_sci();
  auto w = weights({1.2e5, 3.4e5, 9.9e5, 2.2e6});
  auto got = foreign_share(sci, w, "users");
  auto expected = oracle::foreign_share_direct(sci, w, "users");
  ASSERT_EQ(got.size(), 4u);
  for (const auto& [r, share] : expected) {
    EXPECT_NEAR(got.at(r), share, 1e-12) << r.code();
    EXPECT_GE(got.at(r), 0.0);
    EXPECT_LE(got.at(r), 100.0);
  }
}

TEST(ForeignShare, SingleCountryIsZero) {
  Eigen::MatrixXd v(3, 3);
  v << 5, 2, 1, 2, 5, 3, 1, 3, 5;
  SciMatrix sci({R("DE11"), R("DE12"), R("DE13")}, v);
  RegionTable w({"population"});
  for (const auto& r : sci.regions()) w.insert({r, {{"population", 10.0}}});
  for (const auto& [r, share] : foreign_share(sci, w, "population")) EXPECT_EQ(share, 0.0);
}

TEST(ForeignShare, SymmetricPair) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(2, 2, 3.0);
  SciMatrix sci({R("AA1"), R("BB1")}, v);
  RegionTable w({"users"});
  w.insert({R("AA1"), {{"users", 7.0}}});
  w.insert({R("BB1"), {{"users", 7.0}}});
  auto s = foreign_share(sci, w, "users");
  EXPECT_EQ(s.at(R("AA1")), s.at(R("BB1")));
  EXPECT_NEAR(s.at(R("AA1")), 50.0, 1e-12);
}

TEST(ForeignShare, RescalingInvariance) {
  auto sci = four_region_sci();
  auto base = foreign_share(sci, weights({1.0, 2.0, 3.0, 4.0}), "users");
  SciMatrix scaled(sci.regions(), sci.values() * 1234.5);
  auto rescaled = foreign_share(scaled, weights({0.01, 0.02, 0.03, 0.04}), "users");
  for (const auto& [r, share] : base) EXPECT_NEAR(rescaled.at(r), share, 1e-12);
}

TEST(ForeignShare, Errors) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(2, 2, 3.0);
  v(0, 0) = kMissing;
  SciMatrix sci({R("AA1"), R("BB1")}, v);
  RegionTable w({"users"});
  w.insert({R("AA1"), {{"users", 1.0}}});
  w.insert({R("BB1"), {{"users", 1.0}}});
  EXPECT_THROW(foreign_share(sci, w, "users"), ValidationError);
  SciMatrix full({R("AA1"), R("BB1")}, Eigen::MatrixXd::Constant(2, 2, 3.0));
  RegionTable partial({"users"});
  partial.insert({R("AA1"), {{"users", 1.0}}});
  EXPECT_THROW(foreign_share(full, partial, "users"), ValidationError);
}

}  // namespace
}  // namespace gravnet::ingest
