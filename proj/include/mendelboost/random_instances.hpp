#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mendelboost/pedigree.hpp"
#include "mendelboost/penetrance.hpp"
#include "mendelboost/rng.hpp"

namespace mendelboost {

// Random density with lifetime risk in [0.05, 0.8].
Density random_density(Rng& rng);

// Tables over `genes` for cancer "A" (both sexes) and "B" (females only).
PenetranceSet random_penetrance(const std::vector<std::string>& genes, Rng& rng);

// Unknown, unaffected at current age, or affected at a uniform age up to it.
PhenotypeRecord random_record(Rng& rng, int current_age);

// Connected, loop-free pedigree with `n` members (n = 1 or n >= 3) and
// phenotypes for cancers "A" and "B". Grows from one founder couple by adding
// children of existing couples and married-in spouses. Random counselee.
Pedigree random_pedigree(Rng& rng, std::size_t n);

struct OracleCheckReport {
  std::size_t pedigrees = 0;
  double max_abs_difference = 0.0;  // over every genotype posterior
  double seconds = 0.0;
};

// Peeling against exhaustive enumeration on random pedigrees of up to
// `max_members` members over 1..`max_genes` genes with random tables and
// allele frequencies in [0.01, 0.3].
OracleCheckReport oracle_check(std::size_t pedigrees, std::uint64_t seed,
                               std::size_t max_members = 5, std::size_t max_genes = 2);

}  // namespace mendelboost
