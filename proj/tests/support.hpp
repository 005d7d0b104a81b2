#pragma once

#include <string>
#include <vector>

#include "mendelboost/pedigree.hpp"
#include "mendelboost/penetrance.hpp"
#include "mendelboost/random_instances.hpp"
#include "mendelboost/rng.hpp"

namespace mendelboost::testing {

// Compact member description: phenotypes as (affected, age) per cancer.
inline Individual person(std::string id, Sex sex, std::string mother, std::string father,
                         int age, std::vector<PhenotypeRecord> phenotypes = {}) {
  Individual ind;
  ind.id = std::move(id);
  ind.sex = sex;
  if (!mother.empty()) ind.mother_id = std::move(mother);
  if (!father.empty()) ind.father_id = std::move(father);
  ind.current_age = age;
  ind.phenotypes = std::move(phenotypes);
  return ind;
}

inline PhenotypeRecord affected(int age) { return {true, age}; }
inline PhenotypeRecord unaffected(int age) { return {false, age}; }
inline PhenotypeRecord unknown() { return {}; }

using mendelboost::random_density;
using mendelboost::random_pedigree;
using mendelboost::random_record;

inline PenetranceSet random_tables(const std::vector<std::string>& genes, Rng& rng) {
  return random_penetrance(genes, rng);
}

}  // namespace mendelboost::testing
