#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mendelboost/pedigree.hpp"
#include "mendelboost/penetrance.hpp"

namespace mendelboost {

// Counselee genotype distribution given the family history.
struct CarrierPosterior {
  std::vector<double> genotype_probabilities;  // indexed by Genotype
  double carrier_probability = 0.0;            // 1 - P(all noncarrier)
  double log_likelihood = 0.0;                 // log P(H)
};

// P(H_j | G_j = genotype) for one individual. Only cancers present in
// `tables` contribute; records with observed_age 0 and cancers that do not
// apply to the individual's sex contribute a factor of 1.
double phenotype_likelihood(const Individual& individual, std::span<const std::string> cancers,
                            Genotype genotype, const PenetranceSet& tables);

// Precomputes per-genotype densities and survivals once so that many
// pedigrees can be scored against the same model. Immutable and safe to
// share between threads.
class CarrierProbabilityEngine {
 public:
  CarrierProbabilityEngine(PenetranceSet tables, AlleleFrequencies freqs);

  const PenetranceSet& tables() const { return tables_; }
  const GenotypeSpace& space() const { return tables_.space(); }

  // Elston-Stewart peeling over the nuclear-family tree rooted at the
  // counselee. Requires a valid, loop-free pedigree.
  CarrierPosterior peel(const Pedigree& pedigree) const;

  // Exhaustive sum over all 3^(n*G) configurations. Guarded to n*G <= 12.
  CarrierPosterior enumerate(const Pedigree& pedigree) const;

  // out[g] = P(H_j | G_j = g) for member j.
  void member_likelihood(const Pedigree& pedigree, std::size_t member,
                         std::span<double> out) const;

 private:
  struct Columns;
  Columns map_columns(const Pedigree& pedigree) const;
  void fill_likelihood(const Individual& individual, const Columns& columns,
                       std::span<double> out) const;

  void child_to_parents(std::span<const double> child, std::span<double> pairs,
                        std::vector<double>& scratch) const;
  void parents_to_child(std::span<const double> pairs, std::span<double> child,
                        std::vector<double>& scratch) const;

  PenetranceSet tables_;
  AlleleFrequencies freqs_;
  std::size_t n_genes_;
  std::size_t k_;  // genotype count
  std::vector<double> prior_;
  // gene_transmission_[s * 9 + (3 * father_state + mother_state)]
  std::array<double, 27> gene_transmission_{};
  std::vector<std::uint32_t> pair_index_;  // [father * k + mother] -> pair layout
  // Per (cancer, sex, genotype): densities at ages 1..kMaxAge then survival at
  // ages 0..kMaxAge, flattened.
  std::vector<double> curves_;
  std::vector<char> applies_;  // per (cancer, sex)
};

inline constexpr std::size_t kBruteForceLimit = 12;

CarrierPosterior carrier_posterior_peeling(const Pedigree& pedigree, const PenetranceSet& tables,
                                           const AlleleFrequencies& freqs);
CarrierPosterior carrier_posterior_bruteforce(const Pedigree& pedigree,
                                              const PenetranceSet& tables,
                                              const AlleleFrequencies& freqs);

}  // namespace mendelboost
