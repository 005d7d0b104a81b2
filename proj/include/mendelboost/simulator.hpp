#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mendelboost/pedigree.hpp"
#include "mendelboost/penetrance.hpp"
#include "mendelboost/rng.hpp"

namespace mendelboost {

enum class Role {
  counselee,
  mother,
  father,
  grandmother,
  grandfather,
  sibling,
  aunt_uncle,
  spouse,
  child,
  niece_nephew,
};

struct AgeModel {
  double grandmother_mean = 100.0;
  double grandmother_sd = 2.0;
  double spouse_sd = 2.0;
  double child_offset = 30.0;
  double child_sd = 5.0;
  int min_mother_gap = 15;
};

// Number of each relative type. Sibling entries list (daughters, sons) per
// sibling, sisters first.
struct StructureCounts {
  int sisters = 0;
  int brothers = 0;
  int maternal_aunts = 0;
  int maternal_uncles = 0;
  int paternal_aunts = 0;
  int paternal_uncles = 0;
  int daughters = 0;
  int sons = 0;
  std::vector<std::pair<int, int>> sibling_children;

  static StructureCounts uniform(int value);
};

// Mutable family under construction. Parent links are member indices.
struct FamilyDraft {
  std::vector<Individual> members;
  std::vector<Role> roles;
  std::vector<std::size_t> mother;
  std::vector<std::size_t> father;
  std::vector<std::size_t> partner;  // spouse link used by the age model
  std::vector<Genotype> genotypes;
  // event_ages[j][r]: sampled onset age, kCensoredAge when none in range.
  std::vector<std::vector<int>> event_ages;
  std::vector<std::string> cancers;
  std::size_t counselee = 0;

  std::size_t add(Role role, Sex sex, std::size_t mother_idx, std::size_t father_idx);
  Pedigree to_pedigree() const;
  // Members other than married-in spouses of the counselee and siblings.
  std::size_t blood_relatives() const;
};

struct SimulatedFamily {
  Pedigree pedigree;
  std::vector<Genotype> genotypes;         // aligned with pedigree members
  std::vector<std::vector<int>> event_ages;
  std::vector<Role> roles;

  Genotype counselee_genotype() const { return genotypes.at(pedigree.counselee()); }
  bool counselee_carrier() const { return GenotypeSpace::carries_any(counselee_genotype()); }
};

struct SimulationScenario {
  std::size_t n_families = 1000;
  AlleleFrequencies allele_freqs = AlleleFrequencies::uniform(3, kSimulationAlleleFrequency);
  PenetranceSet tables = standin_penetrance(CrcEcLevel::low, GcLevel::high);
  std::uint64_t seed = 1;
  int max_relative_count = 3;  // counts uniform on {0..max}
  AgeModel ages;
  std::string id_prefix;       // prepended to family ids
};

StructureCounts draw_counts(Rng& rng, int max_count = 3);
FamilyDraft build_structure(const StructureCounts& counts, Sex counselee_sex,
                            const std::string& id_prefix = "");
FamilyDraft sample_structure(Rng& rng, int max_count = 3, const std::string& id_prefix = "");

void assign_genotypes(FamilyDraft& family, const AlleleFrequencies& freqs,
                      const GenotypeSpace& space, Rng& rng);
void assign_ages(FamilyDraft& family, const AgeModel& model, Rng& rng);

// Draws onset ages from genotype-specific densities. Precomputes cumulative
// curves for every (cancer, sex, genotype) once.
class CancerSampler {
 public:
  explicit CancerSampler(PenetranceSet tables);
  const PenetranceSet& tables() const { return tables_; }
  int draw_onset(std::size_t cancer, Sex sex, Genotype genotype, Rng& rng) const;

 private:
  PenetranceSet tables_;
  std::vector<double> cdf_;  // [(cancer * 2 + sex) * k + genotype] * kMaxAge + t-1
  std::vector<char> applies_;
};

void assign_cancers(FamilyDraft& family, const CancerSampler& sampler, Rng& rng);

SimulatedFamily simulate_family(const SimulationScenario& scenario, const CancerSampler& sampler,
                                std::size_t family_index);

// Family i uses the stream stream_seed(seed, {i}); output is identical for
// any thread count.
std::vector<SimulatedFamily> simulate_families(const SimulationScenario& scenario,
                                               unsigned threads = 1);

}  // namespace mendelboost
