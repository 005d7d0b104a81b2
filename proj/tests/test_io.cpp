#include <gtest/gtest.h>

#include <sstream>

#include "mendelboost/error.hpp"
#include "mendelboost/io.hpp"
#include "mendelboost/mendelian.hpp"
#include "mendelboost/simulator.hpp"

namespace mendelboost {
namespace {

SimulationScenario small_scenario() {
  SimulationScenario s;
  s.n_families = 12;
  s.seed = 17;
  return s;
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("fam" + std::to_string(i));
  return out;
}

TEST(Csv, SplitsFields) {
  EXPECT_EQ(split_csv_line("a,,b\r"), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(split_csv_line(""), (std::vector<std::string>{""}));
  EXPECT_THROW(split_csv_line("\"a\",b"), ParseError);
}

TEST(Pedigrees, RoundTripSimulatedFamilies) {
  auto sims = simulate_families(small_scenario());
  auto names = ids(sims.size());
  std::vector<FamilyRecord> records;
  for (std::size_t i = 0; i < sims.size(); ++i) records.push_back({names[i], sims[i].pedigree});
  std::stringstream buf;
  write_pedigrees(buf, records);
  auto loaded = read_pedigrees(buf);
  ASSERT_EQ(loaded.size(), records.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_EQ(loaded[i].family_id, names[i]);
    EXPECT_EQ(loaded[i].pedigree.members(), records[i].pedigree.members());
    EXPECT_EQ(loaded[i].pedigree.counselee_id(), records[i].pedigree.counselee_id());
    EXPECT_EQ(loaded[i].pedigree.cancers(), records[i].pedigree.cancers());
  }
}

TEST(Pedigrees, SingleFamilyWithoutFamilyColumn) {
  std::istringstream in(
      "id,sex,mother_id,father_id,current_age,counselee,affected_CRC,age_CRC\n"
      "m,F,,,60,0,1,52\n"
      "f,M,,,62,0,0,62\n"
      "c,F,m,f,35,1,0,35\n");
  auto fams = read_pedigrees(in);
  ASSERT_EQ(fams.size(), 1u);
  EXPECT_EQ(fams[0].family_id, "1");
  const Pedigree& p = fams[0].pedigree;
  EXPECT_EQ(p.counselee_id(), "c");
  EXPECT_EQ(p.cancers(), std::vector<std::string>{"CRC"});
  EXPECT_TRUE(validate(p).ok());
  EXPECT_EQ(p.members()[0].phenotypes[0], (PhenotypeRecord{true, 52}));
}

TEST(Pedigrees, RejectsMalformedInput) {
  std::istringstream two_counselees(
      "id,sex,mother_id,father_id,current_age,counselee\n"
      "a,F,,,60,1\n"
      "b,M,,,60,1\n");
  EXPECT_THROW(read_pedigrees(two_counselees), ParseError);
  std::istringstream bad_age(
      "id,sex,mother_id,father_id,current_age,counselee\n"
      "a,F,,,sixty,1\n");
  EXPECT_THROW(read_pedigrees(bad_age), ParseError);
  std::istringstream short_row(
      "id,sex,mother_id,father_id,current_age,counselee\n"
      "a,F,,,60\n");
  EXPECT_THROW(read_pedigrees(short_row), ParseError);
  std::istringstream bad_header("name,sex\n");
  EXPECT_THROW(read_pedigrees(bad_header), ParseError);
  std::istringstream empty("");
  EXPECT_THROW(read_pedigrees(empty), ParseError);
}

TEST(Penetrance, RoundTripPreservesTablesExactly) {
  PenetranceSet tables = standin_penetrance(CrcEcLevel::high, GcLevel::low);
  std::stringstream buf;
  write_penetrance(buf, tables);
  PenetranceSet loaded = read_penetrance(buf, mmr_genes());
  ASSERT_EQ(loaded.tables().size(), tables.tables().size());
  for (std::size_t c = 0; c < tables.tables().size(); ++c) {
    const auto& a = tables.tables()[c];
    const auto& b = loaded.tables()[c];
    EXPECT_EQ(a.cancer(), b.cancer());
    EXPECT_EQ(a.restricted_to(), b.restricted_to());
    EXPECT_EQ(a.entries(), b.entries());
  }
}

TEST(Penetrance, IncompleteTablesAreRejected) {
  std::istringstream in(
      "cancer,sex,carrier_key,age,density\n"
      "CRC,F,noncarrier,50,0.01\n");
  EXPECT_THROW(read_penetrance(in, mmr_genes()), Error);
}

TEST(TruthAndScores, RoundTrip) {
  auto sims = simulate_families(small_scenario());
  auto names = ids(sims.size());
  std::stringstream truth;
  write_truth(truth, names, sims, GenotypeSpace(mmr_genes()));
  auto t = read_truth(truth);
  ASSERT_EQ(t.size(), sims.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t[i].family_id, names[i]);
    EXPECT_EQ(t[i].carrier, sims[i].counselee_carrier() ? 1 : 0);
  }

  PenetranceSet tables = standin_penetrance(CrcEcLevel::low, GcLevel::high);
  AlleleFrequencies freqs = AlleleFrequencies::uniform(3, kSimulationAlleleFrequency);
  std::vector<ScoreRecord> scores;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    auto post = carrier_posterior_peeling(sims[i].pedigree, tables, freqs);
    scores.push_back({names[i], sims[i].pedigree.counselee_id(), post.carrier_probability,
                      post.log_likelihood});
  }
  scores.back().log_likelihood.reset();
  std::stringstream buf;
  write_scores(buf, scores);
  auto r = read_scores(buf);
  ASSERT_EQ(r.size(), scores.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(r[i].family_id, scores[i].family_id);
    EXPECT_EQ(r[i].counselee_id, scores[i].counselee_id);
    EXPECT_EQ(r[i].carrier_probability, scores[i].carrier_probability);
    EXPECT_EQ(r[i].log_likelihood, scores[i].log_likelihood);
  }

  std::istringstream bad("family_id,carrier_probability\n1,1.5\n");
  EXPECT_THROW(read_scores(bad), ParseError);
}

}  // namespace
}  // namespace mendelboost
