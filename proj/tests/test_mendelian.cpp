#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mendelboost/error.hpp"
#include "mendelboost/mendelian.hpp"
#include "support.hpp"

namespace mendelboost {
namespace {

using testing::affected;
using testing::person;
using testing::unaffected;
using testing::unknown;

// Independent enumeration built only from the penetrance primitives.
std::vector<double> oracle_posterior(const Pedigree& p, const PenetranceSet& tables,
                                     const AlleleFrequencies& freqs) {
  const auto& space = tables.space();
  const std::size_t n = p.size();
  const std::size_t k = space.size();
  auto prior = prevalence(freqs, space);
  std::vector<double> lik(n * k);
  for (std::size_t j = 0; j < n; ++j)
    for (Genotype g = 0; g < k; ++g)
      lik[j * k + g] = phenotype_likelihood(p.members()[j], p.cancers(), g, tables);

  std::vector<double> post(k, 0.0);
  std::vector<Genotype> config(n, 0);
  while (true) {
    double w = 1.0;
    for (std::size_t j = 0; j < n && w > 0.0; ++j) {
      w *= lik[j * k + config[j]];
      auto m = p.mother_of(j);
      auto f = p.father_of(j);
      if (m == kNoParent) {
        w *= prior[config[j]];
      } else {
        for (std::size_t gene = 0; gene < space.n_genes(); ++gene)
          w *= transmission(space.state(config[f], gene),
                            space.state(config[m], gene))[space.state(config[j], gene)];
      }
    }
    post[config[p.counselee()]] += w;
    std::size_t pos = 0;
    while (pos < n && ++config[pos] == k) config[pos++] = 0;
    if (pos == n) break;
  }
  double total = std::accumulate(post.begin(), post.end(), 0.0);
  for (double& v : post) v /= total;
  return post;
}

TEST(Mendelian, SingleIndividualIsPriorTimesLikelihood) {
  auto tables = standin_penetrance(CrcEcLevel::high, GcLevel::high);
  auto freqs = AlleleFrequencies::uniform(3, 0.01);
  Pedigree p({person("a", Sex::female, "", "", 60, {affected(45), unaffected(60), unknown()})},
             "a", {"CRC", "EC", "GC"});
  auto post = carrier_posterior_peeling(p, tables, freqs);
  auto prior = prevalence(freqs, tables.space());
  std::vector<double> expect(prior.size());
  for (Genotype g = 0; g < prior.size(); ++g)
    expect[g] = prior[g] * phenotype_likelihood(p.members()[0], p.cancers(), g, tables);
  double total = std::accumulate(expect.begin(), expect.end(), 0.0);
  for (Genotype g = 0; g < prior.size(); ++g)
    EXPECT_NEAR(post.genotype_probabilities[g], expect[g] / total, 1e-14);
  EXPECT_NEAR(post.carrier_probability, 1.0 - expect[0] / total, 1e-14);
  EXPECT_NEAR(post.log_likelihood, std::log(total), 1e-12);
}

TEST(Mendelian, NoHistoryGivesThePrior) {
  auto tables = standin_penetrance(CrcEcLevel::low, GcLevel::high);
  auto freqs = AlleleFrequencies::uniform(3, 0.01);
  Pedigree p({person("f", Sex::male, "", "", 60, {unknown()}),
              person("m", Sex::female, "", "", 60, {unknown()}),
              person("c", Sex::male, "m", "f", 30, {unknown()})},
             "c", {"CRC"});
  auto post = carrier_posterior_peeling(p, tables, freqs);
  EXPECT_NEAR(post.carrier_probability, 1.0 - std::pow(0.99, 6), 1e-14);
  EXPECT_NEAR(post.log_likelihood, 0.0, 1e-14);
}

TEST(Mendelian, SexExcludedCancerContributesNothing) {
  auto tables = standin_penetrance(CrcEcLevel::high, GcLevel::high);
  auto freqs = AlleleFrequencies::uniform(3, 0.01);
  Pedigree with({person("a", Sex::male, "", "", 60, {affected(40), affected(40)})}, "a",
                {"CRC", "EC"});
  Pedigree without({person("a", Sex::male, "", "", 60, {affected(40), unknown()})}, "a",
                   {"CRC", "EC"});
  EXPECT_EQ(carrier_posterior_peeling(with, tables, freqs).genotype_probabilities,
            carrier_posterior_peeling(without, tables, freqs).genotype_probabilities);
}

TEST(Mendelian, UnmodelledCancersAreIgnored) {
  auto all = standin_penetrance(CrcEcLevel::high, GcLevel::high);
  std::vector<std::string> crc_only = {"CRC"};
  auto tables = all.subset(crc_only);
  auto freqs = AlleleFrequencies::uniform(3, 0.01);
  Pedigree p({person("a", Sex::female, "", "", 60, {affected(40), affected(50)})}, "a",
             {"CRC", "GC"});
  Pedigree q({person("a", Sex::female, "", "", 60, {affected(40), unknown()})}, "a",
             {"CRC", "GC"});
  EXPECT_EQ(carrier_posterior_peeling(p, tables, freqs).carrier_probability,
            carrier_posterior_peeling(q, tables, freqs).carrier_probability);
}

TEST(Mendelian, AffectedRelativesRaiseCarrierProbability) {
  auto tables = standin_penetrance(CrcEcLevel::high, GcLevel::high);
  auto freqs = AlleleFrequencies::uniform(3, 0.01);
  auto family = [](PhenotypeRecord mom) {
    return Pedigree({person("f", Sex::male, "", "", 60, {unaffected(60)}),
                     person("m", Sex::female, "", "", 60, {mom}),
                     person("c", Sex::male, "m", "f", 30, {unaffected(30)})},
                    "c", {"CRC"});
  };
  double base = carrier_posterior_peeling(family(unaffected(60)), tables, freqs).carrier_probability;
  double hit = carrier_posterior_peeling(family(affected(40)), tables, freqs).carrier_probability;
  EXPECT_GT(hit, 2.0 * base);
}

TEST(Mendelian, PeelingMatchesEnumerationAndOracle) {
  Rng rng(2024);
  for (int rep = 0; rep < 60; ++rep) {
    std::vector<std::string> genes = rep % 2 ? std::vector<std::string>{"G1", "G2"}
                                             : std::vector<std::string>{"G1"};
    auto tables = testing::random_tables(genes, rng);
    std::uniform_real_distribution<double> qd(0.01, 0.3);
    AlleleFrequencies freqs;
    for (std::size_t g = 0; g < genes.size(); ++g) freqs.q.push_back(qd(rng));
    std::size_t n = std::array<std::size_t, 4>{1, 3, 4, 5}[static_cast<std::size_t>(rep) % 4];
    Pedigree p = testing::random_pedigree(rng, n);

    auto peel = carrier_posterior_peeling(p, tables, freqs);
    auto brute = carrier_posterior_bruteforce(p, tables, freqs);
    auto oracle = oracle_posterior(p, tables, freqs);
    for (Genotype g = 0; g < oracle.size(); ++g) {
      EXPECT_NEAR(peel.genotype_probabilities[g], brute.genotype_probabilities[g], 1e-10);
      EXPECT_NEAR(peel.genotype_probabilities[g], oracle[g], 1e-10);
    }
    EXPECT_NEAR(peel.log_likelihood, brute.log_likelihood, 1e-9);
  }
}

TEST(Mendelian, PeelingHandlesLargerPedigrees) {
  Rng rng(77);
  auto tables = testing::random_tables({"G1"}, rng);
  AlleleFrequencies freqs{{0.05}};
  for (std::size_t n : {8u, 10u, 12u}) {
    Pedigree p = testing::random_pedigree(rng, n);
    auto peel = carrier_posterior_peeling(p, tables, freqs);
    auto brute = carrier_posterior_bruteforce(p, tables, freqs);
    for (Genotype g = 0; g < 3; ++g)
      EXPECT_NEAR(peel.genotype_probabilities[g], brute.genotype_probabilities[g], 1e-10);
  }
}

TEST(Mendelian, BruteForceIsGuarded) {
  Rng rng(1);
  auto tables = testing::random_tables({"G1", "G2"}, rng);
  Pedigree p = testing::random_pedigree(rng, 7);
  EXPECT_THROW(carrier_posterior_bruteforce(p, tables, AlleleFrequencies{{0.1, 0.1}}),
               InvalidArgument);
}

TEST(Mendelian, ImpossibleHistoryThrows) {
  std::vector<PenetranceTable> ts;
  PenetranceTable t("A");
  for (Sex s : {Sex::female, Sex::male}) {
    t.set_density(s, std::string(kNoncarrier), Density(kMaxAge, 0.0));
    t.set_density(s, "G1", Density(kMaxAge, 0.0));
  }
  ts.push_back(t);
  PenetranceSet tables(GenotypeSpace({"G1"}), ts);
  Pedigree p({person("a", Sex::female, "", "", 60, {affected(40)})}, "a", {"A"});
  EXPECT_THROW(carrier_posterior_peeling(p, tables, AlleleFrequencies{{0.1}}), InvalidArgument);
}

TEST(Mendelian, InvalidPedigreeIsRejected) {
  auto tables = standin_penetrance(CrcEcLevel::high, GcLevel::high);
  Pedigree p({person("a", Sex::female, "zz", "yy", 60, {unknown()})}, "a", {"CRC"});
  EXPECT_THROW(carrier_posterior_peeling(p, tables, AlleleFrequencies::uniform(3, 0.01)),
               InvalidArgument);
}

}  // namespace
}  // namespace mendelboost
