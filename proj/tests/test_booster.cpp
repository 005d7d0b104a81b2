#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mendelboost/booster.hpp"
#include "mendelboost/error.hpp"
#include "mendelboost/rng.hpp"
#include "support.hpp"

namespace mendelboost {
namespace {

using testing::affected;
using testing::person;
using testing::unaffected;

FeatureMatrix matrix(const std::vector<std::vector<double>>& rows) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < rows.front().size(); ++j) names.push_back("f" + std::to_string(j));
  FeatureMatrix m(0, names);
  for (const auto& r : rows) m.push_row(r);
  return m;
}

struct RandomData {
  FeatureMatrix x;
  std::vector<int> y;
  std::vector<double> init;
};

RandomData random_data(Rng& rng, std::size_t n, std::size_t p) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(p));
  RandomData d;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : rows[i]) v = std::round(u(rng) * 20.0) / 20.0;
    double eta = -1.0 + 2.0 * rows[i][0] - rows[i][p - 1];
    d.y.push_back(u(rng) < sigmoid(eta) ? 1 : 0);
    d.init.push_back(-2.0 + 4.0 * u(rng));
  }
  d.x = matrix(rows);
  return d;
}

TEST(Features, ProportionOfAffectedMembers) {
  std::vector<Individual> members;
  members.push_back(person("1", Sex::female, "", "", 60, {affected(50), unaffected(60)}));
  members.push_back(person("2", Sex::male, "", "", 60, {affected(40), unaffected(60)}));
  for (int i = 3; i <= 10; ++i)
    members.push_back(person(std::to_string(i), i <= 6 ? Sex::female : Sex::male, "", "", 50,
                             {unaffected(50), i <= 4 ? affected(45) : unaffected(50)}));
  Pedigree p(members, "1", {"CRC", "EC"});
  std::vector<CancerSite> sites = {{"CRC", std::nullopt}, {"EC", Sex::female}, {"GC", std::nullopt}};
  auto z = extract_features(p, sites);
  EXPECT_DOUBLE_EQ(z[0], 0.2);
  // Females: 1, 3, 4, 5, 6 of whom 3 and 4 have EC.
  EXPECT_DOUBLE_EQ(z[1], 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(z[2], 0.0);
  FeatureOptions without;
  without.include_counselee = false;
  EXPECT_DOUBLE_EQ(extract_features(p, sites, without)[0], 1.0 / 9.0);
}

TEST(Features, SexRestrictedDenominator) {
  std::vector<Individual> members;
  for (int i = 0; i < 6; ++i)
    members.push_back(person("f" + std::to_string(i), Sex::female, "", "", 50,
                             {i < 3 ? affected(40) : unaffected(50)}));
  for (int i = 0; i < 4; ++i)
    members.push_back(person("m" + std::to_string(i), Sex::male, "", "", 50, {unaffected(50)}));
  Pedigree p(members, "f0", {"EC"});
  std::vector<CancerSite> sites = {{"EC", Sex::female}};
  EXPECT_DOUBLE_EQ(extract_features(p, sites)[0], 0.5);
}

TEST(Features, MatrixSelectAndColumns) {
  FeatureMatrix m = matrix({{1, 2, 3}, {4, 5, 6}});
  std::vector<std::size_t> rows = {1, 1, 0};
  std::vector<std::size_t> cols = {2, 0};
  FeatureMatrix s = m.select(rows, cols);
  EXPECT_EQ(s.rows(), 3u);
  EXPECT_EQ(s.names(), (std::vector<std::string>{"f2", "f0"}));
  EXPECT_EQ(s(0, 0), 6.0);
  EXPECT_EQ(s(2, 1), 1.0);
  EXPECT_EQ(m.column("f1"), 1u);
  EXPECT_THROW(m.column("nope"), InvalidArgument);
  std::vector<double> short_row = {1.0};
  EXPECT_THROW(m.push_row(short_row), InvalidArgument);
}

TEST(Booster, DefaultInit) {
  std::vector<int> half = {0, 1, 0, 1};
  EXPECT_DOUBLE_EQ(default_init(half)[0], 0.0);
  std::vector<int> fifth = {1, 0, 0, 0, 0};
  auto init = default_init(fifth);
  EXPECT_EQ(init.size(), 5u);
  EXPECT_NEAR(init[3], std::log(0.25), 1e-15);
  std::vector<int> ones = {1, 1};
  EXPECT_THROW(default_init(ones), InvalidArgument);
}

TEST(Booster, ZeroIterationsReturnsSigmoidOfInit) {
  Rng rng(1);
  auto d = random_data(rng, 50, 2);
  BoostParams params;
  params.iterations = 0;
  BoostModel model = fit(d.x, d.y, d.init, params);
  EXPECT_TRUE(model.trees().empty());
  auto p = predict(model, d.x, d.init);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], sigmoid(d.init[i]));

  // Shifting the init by kappa shifts the predicted log-odds by kappa.
  std::vector<double> shifted = d.init;
  for (double& s : shifted) s += 0.75;
  auto q = predict(fit(d.x, d.y, shifted, params), d.x, shifted);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(logit(q[i]) - logit(p[i]), 0.75, 1e-12);
}

TEST(Booster, ZeroShrinkageLeavesInitUnchanged) {
  Rng rng(2);
  auto d = random_data(rng, 60, 3);
  BoostParams params;
  params.shrinkage = 0.0;
  params.iterations = 10;
  auto p = predict(fit(d.x, d.y, d.init, params), d.x, d.init);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], sigmoid(d.init[i]));
}

TEST(Booster, ConstantFeatureFollowsHandNewtonSteps) {
  FeatureMatrix x = matrix({{1.0}, {1.0}, {1.0}, {1.0}});
  std::vector<int> y = {1, 1, 1, 1};
  std::vector<double> init(4, 0.0);
  BoostParams params;
  params.iterations = 3;
  params.bag_fraction = 1.0;
  params.shrinkage = 0.1;

  std::vector<double> losses;
  BoostModel model = fit(x, y, init, params, [&](int, std::span<const double> scores) {
    losses.push_back(logistic_loss(y, scores));
  });

  // Per iteration: g = p - 1, h = p (1 - p), so w = 1 / p.
  double s = 0.0;
  ASSERT_EQ(model.trees().size(), 3u);
  for (int m = 0; m < 3; ++m) {
    double p = 1.0 / (1.0 + std::exp(-s));
    double w = 1.0 / p;
    const auto& tree = model.trees()[static_cast<std::size_t>(m)];
    ASSERT_EQ(tree.nodes.size(), 1u);
    EXPECT_NEAR(tree.nodes[0].weight, w, 1e-12);
    EXPECT_GT(tree.nodes[0].weight, 0.0);
    s += 0.1 * w;
  }
  auto pred = predict(model, x, init);
  EXPECT_NEAR(pred[0], 1.0 / (1.0 + std::exp(-s)), 1e-12);
  ASSERT_EQ(losses.size(), 3u);
  EXPECT_LT(losses[0], logistic_loss(y, init));
  EXPECT_LT(losses[1], losses[0]);
  EXPECT_LT(losses[2], losses[1]);
}

TEST(Booster, TwoSampleSplitMatchesHandCalculation) {
  FeatureMatrix x = matrix({{0.0}, {1.0}});
  std::vector<int> y = {0, 1};
  std::vector<double> init = {0.0, 0.0};
  BoostParams params;
  params.iterations = 1;
  params.max_depth = 1;
  params.bag_fraction = 1.0;
  params.min_child_weight = 0.0;
  BoostModel model = fit(x, y, init, params);
  ASSERT_EQ(model.trees().size(), 1u);
  const auto& nodes = model.trees()[0].nodes;
  ASSERT_EQ(nodes.size(), 3u);
  EXPECT_EQ(nodes[0].feature, 0);
  EXPECT_EQ(nodes[0].threshold, 0.5);
  // p = 1/2: g = (1/2, -1/2), h = 1/4 each, w = -g / h.
  EXPECT_NEAR(nodes[static_cast<std::size_t>(nodes[0].left)].weight, -2.0, 1e-12);
  EXPECT_NEAR(nodes[static_cast<std::size_t>(nodes[0].right)].weight, 2.0, 1e-12);
  auto p = predict(model, x, init);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(0.2)), 1e-12);
  EXPECT_NEAR(p[1], 1.0 / (1.0 + std::exp(-0.2)), 1e-12);

  // The default min_child_weight forbids leaves this light.
  params.min_child_weight = 1.0;
  EXPECT_EQ(fit(x, y, init, params).trees()[0].nodes.size(), 1u);
}

TEST(Booster, FullBatchLossIsNonIncreasing) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    auto d = random_data(rng, 120, 3);
    BoostParams params;
    params.bag_fraction = 1.0;
    params.iterations = 50;
    double previous = logistic_loss(d.y, d.init);
    bool ok = true;
    fit(d.x, d.y, d.init, params, [&](int, std::span<const double> scores) {
      double loss = logistic_loss(d.y, scores);
      ok = ok && loss <= previous;
      previous = loss;
    });
    EXPECT_TRUE(ok) << "dataset " << rep;
  }
}

TEST(Booster, TreesRespectDepthAndSplitRule) {
  Rng rng(4);
  auto d = random_data(rng, 300, 3);
  BoostParams params;
  params.max_depth = 3;
  BoostModel model = fit(d.x, d.y, d.init, params);
  for (const auto& tree : model.trees()) {
    EXPECT_LE(tree.depth(), 3);
    // Features lie on a 1/20 grid, so midpoints lie on the 1/40 grid.
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) {
        EXPECT_NEAR(node.threshold * 40.0, std::round(node.threshold * 40.0), 1e-9);
      }
    }
  }
}

TEST(Booster, PermutationInvariantWithoutBagging) {
  Rng rng(5);
  auto d = random_data(rng, 80, 3);
  BoostParams params;
  params.bag_fraction = 1.0;
  params.iterations = 20;
  BoostModel a = fit(d.x, d.y, d.init, params);

  std::vector<std::size_t> perm(80);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> cols = {0, 1, 2};
  FeatureMatrix xp = d.x.select(perm, cols);
  std::vector<int> yp;
  std::vector<double> ip;
  for (auto i : perm) {
    yp.push_back(d.y[i]);
    ip.push_back(d.init[i]);
  }
  BoostModel b = fit(xp, yp, ip, params);
  EXPECT_TRUE(a == b);
}

TEST(Booster, SeededBaggingIsDeterministic) {
  Rng rng(6);
  auto d = random_data(rng, 100, 2);
  BoostParams params;
  params.seed = 99;
  EXPECT_TRUE(fit(d.x, d.y, d.init, params) == fit(d.x, d.y, d.init, params));
  BoostParams other = params;
  other.seed = 100;
  EXPECT_FALSE(fit(d.x, d.y, d.init, params) == fit(d.x, d.y, d.init, other));
}

TEST(Booster, InitScoresAreClamped) {
  FeatureMatrix x = matrix({{0.0}, {1.0}});
  std::vector<int> y = {0, 1};
  std::vector<double> wild = {-1000.0, 1000.0};
  BoostParams params;
  params.iterations = 0;
  auto p = predict(fit(x, y, wild, params), x, wild);
  EXPECT_EQ(p[0], sigmoid(-kInitScoreBound));
  EXPECT_EQ(p[1], sigmoid(kInitScoreBound));
  std::vector<double> inf = {-INFINITY, 0.0};
  EXPECT_THROW(fit(x, y, inf, params), InvalidArgument);
}

TEST(Booster, RejectsBadInput) {
  FeatureMatrix x = matrix({{0.0}, {1.0}});
  std::vector<double> init = {0.0, 0.0};
  std::vector<int> bad = {0, 2};
  EXPECT_THROW(fit(x, bad, init, BoostParams{}), InvalidArgument);
  FeatureMatrix empty(0, {"f0"});
  EXPECT_THROW(fit(empty, {}, {}, BoostParams{}), InvalidArgument);
  BoostParams params;
  params.bag_fraction = 0.0;
  std::vector<int> y = {0, 1};
  EXPECT_THROW(fit(x, y, init, params), InvalidArgument);
  BoostModel model = fit(x, y, init, BoostParams{});
  FeatureMatrix renamed(0, {"other"});
  std::vector<double> row = {0.0};
  renamed.push_row(row);
  std::vector<double> one = {0.0};
  EXPECT_THROW(predict(model, renamed, one), InvalidArgument);
}

TEST(Booster, SaveLoadRoundTrip) {
  Rng rng(7);
  auto d = random_data(rng, 150, 3);
  BoostParams params;
  params.seed = 3;
  params.shrinkage = 0.1;
  BoostModel model = fit(d.x, d.y, d.init, params);
  std::stringstream buf;
  model.save(buf);
  BoostModel loaded = BoostModel::load(buf);
  EXPECT_TRUE(model == loaded);
  EXPECT_EQ(predict(model, d.x, d.init), predict(loaded, d.x, d.init));

  std::stringstream again;
  loaded.save(again);
  std::stringstream first;
  model.save(first);
  EXPECT_EQ(first.str(), again.str());

  std::stringstream junk("not a model");
  EXPECT_THROW(BoostModel::load(junk), ParseError);
}

TEST(Booster, LogisticLossIsStable) {
  std::vector<int> y = {1, 0};
  std::vector<double> s = {800.0, -800.0};
  EXPECT_NEAR(logistic_loss(y, s), 0.0, 1e-300);
  std::vector<double> zero = {0.0, 0.0};
  EXPECT_NEAR(logistic_loss(y, zero), 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-300);
  EXPECT_NEAR(logit(sigmoid(1.25)), 1.25, 1e-12);
}

}  // namespace
}  // namespace mendelboost
