#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mendelboost/error.hpp"
#include "mendelboost/penetrance.hpp"
#include "support.hpp"

namespace mendelboost {
namespace {

TEST(Penetrance, SurvivalAndDensityRoundTrip) {
  Rng rng(1);
  Density f = testing::random_density(rng);
  Survival s = survival_from_density(f);
  ASSERT_EQ(s.size(), static_cast<std::size_t>(kMaxAge + 1));
  EXPECT_EQ(s[0], 1.0);
  EXPECT_NEAR(s.back(), 1.0 - lifetime_risk(f), 1e-12);
  Density back = density_from_survival(s);
  for (std::size_t t = 0; t < f.size(); ++t) EXPECT_NEAR(back[t], f[t], 1e-15);
}

TEST(Penetrance, RejectsBadDensities) {
  EXPECT_THROW(check_density(Density(10, 0.0)), InvalidArgument);
  Density negative(kMaxAge, 0.0);
  negative[3] = -0.1;
  EXPECT_THROW(check_density(negative), InvalidArgument);
  EXPECT_THROW(check_density(Density(kMaxAge, 0.02)), InvalidArgument);
}

TEST(Penetrance, GenotypeIndexing) {
  GenotypeSpace space({"A", "B", "C"});
  EXPECT_EQ(space.size(), 27u);
  std::vector<int> states = {2, 0, 1};
  Genotype g = space.index(states);
  EXPECT_EQ(g, 2u + 0u * 3u + 1u * 9u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(space.state(g, k), states[k]);
  EXPECT_FALSE(GenotypeSpace::carries_any(0));
  EXPECT_TRUE(GenotypeSpace::carries_any(g));
}

TEST(Penetrance, HardyWeinbergPrevalence) {
  GenotypeSpace space({"A", "B"});
  AlleleFrequencies q{{0.01, 0.2}};
  auto prior = prevalence(q, space);
  EXPECT_NEAR(std::accumulate(prior.begin(), prior.end(), 0.0), 1.0, 1e-15);
  EXPECT_NEAR(prior[0], 0.99 * 0.99 * 0.8 * 0.8, 1e-15);
  std::vector<int> het_hom = {1, 2};
  EXPECT_NEAR(prior[space.index(het_hom)], 2 * 0.01 * 0.99 * 0.04, 1e-15);
  EXPECT_THROW(prevalence(AlleleFrequencies{{0.0, 0.1}}, space), InvalidArgument);
}

TEST(Penetrance, MendelianTransmission) {
  auto t = transmission(1, 1);
  EXPECT_DOUBLE_EQ(t[0], 0.25);
  EXPECT_DOUBLE_EQ(t[1], 0.5);
  EXPECT_DOUBLE_EQ(t[2], 0.25);
  t = transmission(2, 0);
  EXPECT_DOUBLE_EQ(t[1], 1.0);
  t = transmission(0, 0);
  EXPECT_DOUBLE_EQ(t[0], 1.0);
}

TEST(Penetrance, CombinedSurvivalIsProductOfCarrierCurves) {
  Rng rng(5);
  auto tables = testing::random_tables({"G1", "G2"}, rng);
  const auto& a = tables.at("A");
  const auto& space = tables.space();
  std::vector<int> both = {1, 2};
  auto s = combined_survival(a, space, space.index(both), Sex::male);
  auto s1 = survival_from_density(a.density(Sex::male, "G1"));
  auto s2 = survival_from_density(a.density(Sex::male, "G2"));
  for (std::size_t t = 0; t < s.size(); ++t) EXPECT_NEAR(s[t], s1[t] * s2[t], 1e-15);
  auto s0 = combined_survival(a, space, 0, Sex::male);
  EXPECT_EQ(s0, survival_from_density(a.density(Sex::male, kNoncarrier)));
  auto excluded = combined_survival(tables.at("B"), space, 0, Sex::male);
  EXPECT_TRUE(std::all_of(excluded.begin(), excluded.end(), [](double v) { return v == 1.0; }));
}

TEST(Penetrance, MisspecifyRaisesSurvival) {
  Rng rng(9);
  auto tables = testing::random_tables({"G1"}, rng);
  const auto& a = tables.at("A");
  auto half = misspecify(a, 0.5);
  auto s = survival_from_density(a.density(Sex::female, "G1"));
  auto sh = survival_from_density(half.density(Sex::female, "G1"));
  for (std::size_t t = 0; t < s.size(); ++t) EXPECT_NEAR(sh[t], std::sqrt(s[t]), 1e-12);
  auto same = misspecify(a, 1.0);
  for (const auto& [key, density] : a.entries())
    for (std::size_t t = 0; t < density.size(); ++t)
      EXPECT_NEAR(same.density(key.first, key.second)[t], density[t], 1e-15);
  EXPECT_THROW(misspecify(a, 0.0), InvalidArgument);
}

TEST(Penetrance, WeibullHasRequestedRiskAndMode) {
  Density f = discrete_weibull_density({0.4, 60.0});
  EXPECT_NEAR(lifetime_risk(f), 0.4, 1e-12);
  auto peak = std::max_element(f.begin(), f.end()) - f.begin() + 1;
  EXPECT_NEAR(static_cast<double>(peak), 60.0, 1.0);
  // Far left tail of a shape-4 Weibull is negligible.
  EXPECT_LT(f[0], 1e-6);
}

TEST(Penetrance, StandinTablesAreComplete) {
  for (auto crc : {CrcEcLevel::low, CrcEcLevel::high})
    for (auto gc : {GcLevel::low, GcLevel::high}) {
      auto set = standin_penetrance(crc, gc);
      EXPECT_NO_THROW(set.check_complete());
      EXPECT_EQ(set.space().genes(), mmr_genes());
      EXPECT_FALSE(set.at("EC").applies_to(Sex::male));
    }
  auto low = standin_penetrance(CrcEcLevel::low, GcLevel::high);
  EXPECT_NEAR(lifetime_risk(low.at("CRC").density(Sex::male, "MLH1")), 0.2, 1e-12);
  EXPECT_NEAR(lifetime_risk(low.at("GC").density(Sex::male, "MSH2")), 0.5, 1e-12);
  EXPECT_NEAR(lifetime_risk(low.at("GC").density(Sex::male, kNoncarrier)), 0.05, 1e-12);
  auto lowgc = standin_penetrance(CrcEcLevel::low, GcLevel::low);
  const auto& base = lowgc.at("GC").density(Sex::female, kNoncarrier);
  const auto& carrier = lowgc.at("GC").density(Sex::female, "MLH1");
  for (std::size_t t = 0; t < base.size(); ++t) EXPECT_DOUBLE_EQ(carrier[t], 2.0 * base[t]);
}

TEST(Penetrance, SetSubsetAndExponent) {
  auto set = standin_penetrance(CrcEcLevel::high, GcLevel::high);
  std::vector<std::string> keep = {"EC", "CRC"};
  auto sub = set.subset(keep);
  ASSERT_EQ(sub.tables().size(), 2u);
  EXPECT_EQ(sub.tables()[0].cancer(), "EC");
  EXPECT_EQ(sub.find("GC"), nullptr);
  EXPECT_THROW(sub.at("GC"), InvalidArgument);
  EXPECT_THROW(sub.with_exponent("GC", 2.0), InvalidArgument);
  auto mis = sub.with_exponent("CRC", 2.0);
  EXPECT_GT(lifetime_risk(mis.at("CRC").density(Sex::male, "MLH1")),
            lifetime_risk(sub.at("CRC").density(Sex::male, "MLH1")));
}

}  // namespace
}  // namespace mendelboost
