#include <algorithm>
#include <numeric>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "subapsnap/linalg.hpp"
#include "subapsnap/problems.hpp"
#include "subapsnap/subsample.hpp"
#include "support.hpp"

using namespace subapsnap;
using namespace subapsnap::testing;
namespace la = subapsnap::linalg;

namespace {

SelectorConfig config(Strategy strategy, double oversample = 4.0, bool augment = false) {
  SelectorConfig c;
  c.strategy = strategy;
  c.oversample = oversample;
  c.augment_with_rhs = augment;
  return c;
}

}  // namespace

TEST(Leverage, IdentityColumns) {
  const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(6, 2);
  const auto s = leverage_scores<double>(q);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(6);
  expected.head(2).setOnes();
  EXPECT_EQ(s, expected);
}

TEST(Leverage, UniformColumn) {
  const Eigen::MatrixXd q = Eigen::MatrixXd::Constant(8, 1, 1.0 / std::sqrt(8.0));
  const auto s = leverage_scores<double>(q);
  for (Index i = 0; i < 8; ++i) EXPECT_NEAR(s(i), 1.0 / 8, 1e-15);
}

TEST(Leverage, TraceIdentity) {
  Rng rng(41);
  const Eigen::MatrixXcd q = orthonormal<cdouble>(100, 5, rng);
  const auto s = leverage_scores<cdouble>(q);
  EXPECT_NEAR(s.sum(), 5.0, 1e-10);
  EXPECT_GE(s.minCoeff(), 0.0);
  EXPECT_LE(s.maxCoeff(), 1.0 + 1e-12);
}

TEST(Leverage, RejectsNonOrthonormal) {
  Rng rng(42);
  EXPECT_THROW(leverage_scores<double>(gaussian(10, 2, rng)), NumericalError);
}

TEST(SelectRows, LeverageSupportAndWeights) {
  Rng rng(43);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(4, 2);
  const auto sel = select_rows<double>(b, nullptr, config(Strategy::leverage), rng);
  ASSERT_EQ(sel.size(), 8);
  ASSERT_TRUE(sel.weighted());
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_TRUE(sel.indices[j] == 0 || sel.indices[j] == 1);
    EXPECT_NEAR(sel.weights[j], 1.0 / std::sqrt(8 * 0.5), 1e-15);
  }
}

TEST(SelectRows, LuppNonsingular) {
  Rng rng(44);
  const Eigen::MatrixXd b = gaussian(50, 4, rng);
  const auto sel = select_rows<double>(b, nullptr, config(Strategy::lupp), rng);
  ASSERT_EQ(sel.size(), 4);
  EXPECT_FALSE(sel.weighted());
  EXPECT_GT(std::abs(sel.apply(b).determinant()), 0.0);
}

TEST(SelectRows, AugmentedPivotsOneMore) {
  Rng rng(45);
  const Eigen::MatrixXd b = gaussian(50, 4, rng);
  const Eigen::VectorXd rhs = gaussian_vector(50, rng);
  for (Strategy s : {Strategy::lupp, Strategy::cpqr}) {
    const auto sel = select_rows<double>(b, &rhs, config(s, 4.0, true), rng);
    EXPECT_EQ(sel.size(), 5) << to_string(s);
  }
}

TEST(SelectRows, RandomReproducibleUnderSeed) {
  Rng rng(46);
  const Eigen::MatrixXd b = gaussian(50, 4, rng);
  Rng a(7), c(7);
  const auto s1 = select_rows<double>(b, nullptr, config(Strategy::random), a);
  const auto s2 = select_rows<double>(b, nullptr, config(Strategy::random), c);
  EXPECT_EQ(s1.indices, s2.indices);
  EXPECT_EQ(s1.size(), 16);
  EXPECT_FALSE(s1.weighted());
  EXPECT_EQ(std::set<Index>(s1.indices.begin(), s1.indices.end()).size(), 16u);
}

TEST(SelectRows, ArpPicksDistinctRows) {
  Rng rng(47);
  const Eigen::MatrixXd b = gaussian(40, 5, rng);
  const auto sel = select_rows<double>(b, nullptr, config(Strategy::arp), rng);
  ASSERT_EQ(sel.size(), 5);
  EXPECT_EQ(std::set<Index>(sel.indices.begin(), sel.indices.end()).size(), 5u);
  EXPECT_GT(la::singular_values<double>(sel.apply(b)).minCoeff(), 0.0);
}

TEST(SelectRows, ArpDegenerateThrows) {
  Rng rng(48);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(10, 2);
  b(3, 0) = 1;
  b(3, 1) = 2;
  EXPECT_THROW(select_rows<double>(b, nullptr, config(Strategy::arp), rng), RankDeficientError);
}

TEST(SelectRows, DeterministicStrategiesArePermutationEquivariant) {
  Rng rng(49);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd b = gaussian(30, 4, rng);
    std::vector<Index> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Eigen::MatrixXd permuted(30, 4);
    for (Index i = 0; i < 30; ++i) permuted.row(i) = b.row(perm[i]);
    for (Strategy s : {Strategy::lupp, Strategy::cpqr}) {
      Rng r1(1), r2(1);
      const auto base = select_rows<double>(b, nullptr, config(s), r1);
      const auto moved = select_rows<double>(permuted, nullptr, config(s), r2);
      ASSERT_EQ(base.size(), moved.size());
      for (Index j = 0; j < base.size(); ++j) EXPECT_EQ(perm[moved.indices[j]], base.indices[j]);
    }
  }
}

TEST(SelectRows, SampledPolarFactorKeepsRank) {
  Rng rng(50);
  std::map<Strategy, int> failures;
  const std::vector<Strategy> strategies{Strategy::lupp, Strategy::cpqr, Strategy::leverage, Strategy::arp,
                                         Strategy::random};
  for (int trial = 0; trial < 1000; ++trial) {
    const Index r = 1 + static_cast<Index>(rng.uniform() * 6);
    const Index n = 4 * r + static_cast<Index>(rng.uniform() * 30);
    const Eigen::MatrixXd b = gaussian(n, r, rng);
    const Eigen::MatrixXd u = la::polar_unitary<double>(b).unitary;
    for (Strategy s : strategies) {
      Rng sub = rng.split(static_cast<std::uint64_t>(trial) * 8 + static_cast<std::uint64_t>(s));
      const auto sel = select_rows<double>(b, nullptr, config(s), sub);
      const auto sv = la::singular_values<double>(sel.apply(u));
      if (!(sv.size() == r && sv(r - 1) > 1e-12)) ++failures[s];
    }
  }
  for (Strategy s : {Strategy::lupp, Strategy::cpqr, Strategy::arp}) EXPECT_EQ(failures[s], 0) << to_string(s);
  EXPECT_LE(failures[Strategy::leverage], 10);
  EXPECT_LE(failures[Strategy::random], 10);
}

TEST(SelectorNorm, RepeatedIndicesAddInQuadrature) {
  RowSelector sel;
  sel.n = 5;
  sel.indices = {1, 3, 1};
  sel.weights = {0.6, 0.5, 0.8};
  sel.strategy = Strategy::leverage;
  EXPECT_NEAR(sel.operator_norm(), 1.0, 1e-15);
  EXPECT_EQ(full_selector(5).operator_norm(), 1.0);
}

TEST(Merge, UnionSorted) {
  RowSelector a, b;
  a.n = b.n = 10;
  a.indices = {3, 0};
  b.indices = {7, 3};
  const std::vector<RowSelector> both{a, b};
  EXPECT_EQ(merge_selectors(both).indices, (std::vector<Index>{0, 3, 7}));
  const std::vector<RowSelector> one{a};
  EXPECT_EQ(merge_selectors(one).indices, (std::vector<Index>{0, 3}));
}

TEST(Merge, RejectsWeighted) {
  RowSelector a, b;
  a.n = b.n = 10;
  a.indices = {1};
  b.indices = {2};
  b.weights = {1.0};
  const std::vector<RowSelector> both{a, b};
  EXPECT_THROW(merge_selectors(both), ConfigError);
}

TEST(Anchors, MedianPoint) {
  EXPECT_EQ(median_point(line_points(-10, -9, 7)), 3);
  EXPECT_EQ(median_point(line_points(0, 1, 4)), 1);
  std::vector<Parameter> freq{make_parameter(cdouble(0, 100)), make_parameter(cdouble(0, 1)),
                              make_parameter(cdouble(0, 10))};
  EXPECT_EQ(median_point(freq), 2);
}

TEST(Anchors, UnionCardinality) {
  const auto sys = build_problem<double>(TridiagSpec{});
  const auto basis = build_snapshot(*sys, default_snapshot_points(sys->domain(), 7, PointLayout::equispaced));
  SelectorConfig c = config(Strategy::lupp);
  c.anchor = AnchorChoice::union_of;
  c.union_count = 3;
  const auto sels = build_selectors(*sys, basis, c);
  ASSERT_EQ(sels.size(), 1u);
  EXPECT_GE(sels[0].size(), 7);
  EXPECT_LE(sels[0].size(), 21);
  EXPECT_EQ(sels[0].anchors.size(), 3u);
}

TEST(Anchors, NearestGivesOnePerSnapshot) {
  const auto sys = build_problem<double>(TridiagSpec{});
  const auto basis = build_snapshot(*sys, default_snapshot_points(sys->domain(), 5, PointLayout::equispaced));
  SelectorConfig c = config(Strategy::cpqr);
  c.anchor = AnchorChoice::nearest;
  const auto sels = build_selectors(*sys, basis, c);
  ASSERT_EQ(sels.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(sels[k].anchors.front(), basis.points[k]);
}

TEST(Strategy, NamesRoundTrip) {
  for (Strategy s : {Strategy::random, Strategy::lupp, Strategy::cpqr, Strategy::leverage, Strategy::arp}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_THROW(parse_strategy("dpp"), ConfigError);
}
