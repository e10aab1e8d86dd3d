#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <cmath>
#include <random>
#include <sstream>

#include "gravnet/cluster/hierarchical.hpp"
#include "gravnet/core/csv.hpp"
#include "gravnet/core/errors.hpp"
#include "support/oracles.hpp"

namespace gravnet::cluster {
namespace {

RegionId R(const char* code) { return RegionId(code); }

DistanceMatrix four_point() {
  Eigen::MatrixXd d(4, 4);
  d << 0, 1, 10, 10,
       1, 0, 10, 10,
       10, 10, 0, 1,
       10, 10, 1, 0;
  return DistanceMatrix({R("AA1"), R("AA2"), R("BB1"), R("BB2")}, d);
}

void expect_same_tree(const std::vector<MergeStep>& got, const std::vector<MergeStep>& want,
                      double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t s = 0; s < got.size(); ++s) {
    EXPECT_EQ(got[s].left, want[s].left) << "step " << s;
    EXPECT_EQ(got[s].right, want[s].right) << "step " << s;
    EXPECT_EQ(got[s].new_id, want[s].new_id) << "step " << s;
    EXPECT_NEAR(got[s].height, want[s].height, tol) << "step " << s;
  }
}

TEST(BuildDistance, Reciprocal) {
  Eigen::MatrixXd v(3, 3);
  v << kMissing, 4, 1, 4, 7, 2, 1, 2, 3;
  auto d = build_distance(SciMatrix({R("AA1"), R("AA2"), R("AA3")}, v));
  EXPECT_EQ(d(0, 1), 0.25);
  EXPECT_EQ(d(0, 2), 1.0);
  EXPECT_EQ(d(1, 2), 0.5);
  EXPECT_EQ(d(0, 0), 0.0);
  EXPECT_EQ(d(1, 1), 0.0);
}

TEST(BuildDistance, UniformMap) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(5, 5, 2.5);
  std::vector<RegionId> regions;
  for (int k = 0; k < 5; ++k) regions.emplace_back("CC" + std::to_string(k));
  auto d = build_distance(SciMatrix(regions, v));
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) EXPECT_EQ(d(a, b), a == b ? 0.0 : 0.4);
  }
}

TEST(DistanceMatrix, Validation) {
  Eigen::MatrixXd d(2, 2);
  d << 0, 1, 2, 0;
  EXPECT_THROW(DistanceMatrix({R("AA1"), R("AA2")}, d), ValidationError);
  d << 0, 0, 0, 0;
  EXPECT_THROW(DistanceMatrix({R("AA1"), R("AA2")}, d), ValidationError);
  Eigen::MatrixXd one = Eigen::MatrixXd::Zero(1, 1);
  EXPECT_THROW(agglomerate(DistanceMatrix({R("AA1")}, one)), ValidationError);
}

TEST(Agglomerate, TwoPoints) {
  Eigen::MatrixXd d(2, 2);
  d << 0, 3.5, 3.5, 0;
  auto tree = agglomerate(DistanceMatrix({R("BB1"), R("AA1")}, d));
  ASSERT_EQ(tree.steps().size(), 1u);
  EXPECT_EQ(tree.steps()[0].height, 3.5);
  EXPECT_EQ(tree.steps()[0].left, 1);  // AA1 sorts first
  EXPECT_EQ(tree.steps()[0].right, 0);
  EXPECT_EQ(tree.steps()[0].new_id, 2);
}

TEST(Agglomerate, FourPointFixture) {
  auto d = four_point();
  auto tree = agglomerate(d);
  ASSERT_EQ(tree.steps().size(), 3u);
  EXPECT_EQ(tree.steps()[0], (MergeStep{0, 1, 1.0, 4}));
  EXPECT_EQ(tree.steps()[1], (MergeStep{2, 3, 1.0, 5}));
  EXPECT_EQ(tree.steps()[2], (MergeStep{4, 5, 10.0, 6}));
  expect_same_tree(tree.steps(), oracle::naive_agglomerate(d), 0.0);
}

TEST(Agglomerate, EightPointMatchesNaiveOracle) {
  std::mt19937_64 rng(8);
  auto d = oracle::random_distance(8, rng);
  expect_same_tree(agglomerate(d).steps(), oracle::naive_agglomerate(d), 1e-12);
}

TEST(Agglomerate, RandomMatchesNaiveOracle) {
  std::mt19937_64 rng(424242);
  std::uniform_int_distribution<int> size(3, 40);
  for (int trial = 0; trial < 25; ++trial) {
    auto d = oracle::random_distance(size(rng), rng);
    auto tree = agglomerate(d);
    auto naive = oracle::naive_agglomerate(d);
    expect_same_tree(tree.steps(), naive, 1e-12);
    for (int k = 1; k <= static_cast<int>(d.size()); ++k) {
      EXPECT_EQ(cut(tree, k).communities(), oracle::naive_cut(d.regions(), naive, k));
    }
  }
}

TEST(Agglomerate, TiesUseCanonicalRegions) {
  // All distances equal: merges follow region order.
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(4, 4, 2.0);
  d.diagonal().setZero();
  DistanceMatrix dm({R("DD1"), R("BB1"), R("CC1"), R("AA1")}, d);
  auto tree = agglomerate(dm);
  expect_same_tree(tree.steps(), oracle::naive_agglomerate(dm), 0.0);
  EXPECT_EQ(tree.steps()[0].left, 3);   // AA1
  EXPECT_EQ(tree.steps()[0].right, 1);  // BB1
}

TEST(Cut, Extremes) {
  auto tree = agglomerate(four_point());
  auto all = cut(tree, 4);
  EXPECT_EQ(all.k(), 4);
  for (const auto& c : all.communities()) EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(all.label(R("AA1")), 1);
  EXPECT_EQ(all.label(R("BB2")), 4);
  auto one = cut(tree, 1);
  ASSERT_EQ(one.communities().size(), 1u);
  EXPECT_EQ(one.communities()[0].size(), 4u);
  EXPECT_THROW(cut(tree, 0), ValidationError);
  EXPECT_THROW(cut(tree, 5), ValidationError);
}

TEST(Cut, FourPointTwoPairs) {
  auto two = cut(agglomerate(four_point()), 2);
  auto c = two.communities();
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0], (std::set<RegionId>{R("AA1"), R("AA2")}));
  EXPECT_EQ(c[1], (std::set<RegionId>{R("BB1"), R("BB2")}));
}

TEST(Cut, Refinement) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    auto d = oracle::random_distance(5 + 3 * trial, rng);
    auto tree = agglomerate(d);
    for (int k = 2; k <= static_cast<int>(d.size()); ++k) {
      auto fine = cut(tree, k);
      auto coarse = cut(tree, k - 1);
      for (const auto& community : fine.communities()) {
        std::set<int> parents;
        for (const auto& r : community) parents.insert(coarse.label(r));
        EXPECT_EQ(parents.size(), 1u);
      }
    }
  }
}

TEST(Agglomerate, PermutationInvariance) {
  std::mt19937_64 rng(1234);
  auto d = oracle::random_distance(15, rng);
  std::vector<std::size_t> perm(d.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<RegionId> regions;
  Eigen::MatrixXd v(d.size(), d.size());
  for (std::size_t a = 0; a < d.size(); ++a) {
    regions.push_back(d.regions()[perm[a]]);
    for (std::size_t b = 0; b < d.size(); ++b) v(a, b) = d(perm[a], perm[b]);
  }
  auto original = agglomerate(d);
  auto permuted = agglomerate(DistanceMatrix(regions, v));
  for (int k = 1; k <= 15; ++k) {
    EXPECT_EQ(cut(original, k).labels(), cut(permuted, k).labels()) << "k " << k;
  }
}

TEST(Agglomerate, ScaleInvariance) {
  std::mt19937_64 rng(77);
  auto d = oracle::random_distance(12, rng);
  const double c = 8.0;  // power of two keeps the scaling exact
  auto base = agglomerate(d);
  auto scaled = agglomerate(DistanceMatrix(d.regions(), d.values() * c));
  for (std::size_t s = 0; s < base.steps().size(); ++s) {
    EXPECT_EQ(base.steps()[s].left, scaled.steps()[s].left);
    EXPECT_EQ(base.steps()[s].right, scaled.steps()[s].right);
    EXPECT_NEAR(scaled.steps()[s].height, c * base.steps()[s].height,
                1e-12 * c * base.steps()[s].height);
  }
  auto odd = agglomerate(DistanceMatrix(d.regions(), d.values() * 3.7));
  for (int k = 1; k <= 12; ++k) {
    EXPECT_EQ(cut(base, k).labels(), cut(odd, k).labels());
  }
}

TEST(MergeTree, CsvLayout) {
  auto tree = agglomerate(four_point());
  std::ostringstream steps, leaves, assignment;
  tree.write_csv(steps);
  tree.write_leaves_csv(leaves);
  cut(tree, 2).write_csv(assignment);
  EXPECT_EQ(steps.str(),
            "step,left,right,height,new_id\n1,0,1,1,4\n2,2,3,1,5\n3,4,5,10,6\n");
  EXPECT_EQ(leaves.str(), "id,region\n0,AA1\n1,AA2\n2,BB1\n3,BB2\n");
  EXPECT_EQ(assignment.str(), "region,community\nAA1,1\nAA2,1\nBB1,2\nBB2,2\n");
  EXPECT_TRUE(tree.inversions().empty());
}

}  // namespace
}  // namespace gravnet::cluster
