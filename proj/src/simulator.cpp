#include "mendelboost/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mendelboost/error.hpp"
#include "mendelboost/parallel.hpp"

namespace mendelboost {

StructureCounts StructureCounts::uniform(int value) {
  StructureCounts c;
  c.sisters = c.brothers = value;
  c.maternal_aunts = c.maternal_uncles = value;
  c.paternal_aunts = c.paternal_uncles = value;
  c.daughters = c.sons = value;
  c.sibling_children.assign(static_cast<std::size_t>(2 * value), {value, value});
  return c;
}

std::size_t FamilyDraft::add(Role role, Sex sex, std::size_t mother_idx, std::size_t father_idx) {
  const std::size_t idx = members.size();
  Individual ind;
  ind.sex = sex;
  members.push_back(std::move(ind));
  roles.push_back(role);
  mother.push_back(mother_idx);
  father.push_back(father_idx);
  partner.push_back(kNoParent);
  return idx;
}

Pedigree FamilyDraft::to_pedigree() const {
  std::vector<Individual> out = members;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (mother[j] != kNoParent) out[j].mother_id = members[mother[j]].id;
    if (father[j] != kNoParent) out[j].father_id = members[father[j]].id;
    if (out[j].phenotypes.size() != cancers.size())
      out[j].phenotypes.assign(cancers.size(), PhenotypeRecord{});
  }
  return Pedigree(std::move(out), members.at(counselee).id, cancers);
}

std::size_t FamilyDraft::blood_relatives() const {
  return static_cast<std::size_t>(
      std::count_if(roles.begin(), roles.end(), [](Role r) { return r != Role::spouse; }));
}

StructureCounts draw_counts(Rng& rng, int max_count) {
  std::uniform_int_distribution<int> count(0, max_count);
  StructureCounts c;
  c.sisters = count(rng);
  c.brothers = count(rng);
  c.maternal_aunts = count(rng);
  c.maternal_uncles = count(rng);
  c.paternal_aunts = count(rng);
  c.paternal_uncles = count(rng);
  c.daughters = count(rng);
  c.sons = count(rng);
  for (int s = 0; s < c.sisters + c.brothers; ++s) {
    const int d = count(rng);
    c.sibling_children.emplace_back(d, count(rng));
  }
  return c;
}

FamilyDraft build_structure(const StructureCounts& counts, Sex counselee_sex,
                            const std::string& id_prefix) {
  if (counts.sibling_children.size() != static_cast<std::size_t>(counts.sisters + counts.brothers))
    throw InvalidArgument("one (daughters, sons) entry required per sibling");
  FamilyDraft fam;
  const std::size_t proband = fam.add(Role::counselee, counselee_sex, kNoParent, kNoParent);
  const std::size_t mother = fam.add(Role::mother, Sex::female, kNoParent, kNoParent);
  const std::size_t father = fam.add(Role::father, Sex::male, kNoParent, kNoParent);
  const std::size_t mgm = fam.add(Role::grandmother, Sex::female, kNoParent, kNoParent);
  const std::size_t mgf = fam.add(Role::grandfather, Sex::male, kNoParent, kNoParent);
  const std::size_t pgm = fam.add(Role::grandmother, Sex::female, kNoParent, kNoParent);
  const std::size_t pgf = fam.add(Role::grandfather, Sex::male, kNoParent, kNoParent);
  fam.mother[proband] = mother;
  fam.father[proband] = father;
  fam.mother[mother] = mgm;
  fam.father[mother] = mgf;
  fam.mother[father] = pgm;
  fam.father[father] = pgf;
  fam.partner[mother] = father;
  fam.partner[father] = mother;
  fam.partner[mgm] = mgf;
  fam.partner[mgf] = mgm;
  fam.partner[pgm] = pgf;
  fam.partner[pgf] = pgm;

  std::vector<std::size_t> siblings;
  for (int i = 0; i < counts.sisters; ++i)
    siblings.push_back(fam.add(Role::sibling, Sex::female, mother, father));
  for (int i = 0; i < counts.brothers; ++i)
    siblings.push_back(fam.add(Role::sibling, Sex::male, mother, father));
  for (int i = 0; i < counts.maternal_aunts; ++i) fam.add(Role::aunt_uncle, Sex::female, mgm, mgf);
  for (int i = 0; i < counts.maternal_uncles; ++i) fam.add(Role::aunt_uncle, Sex::male, mgm, mgf);
  for (int i = 0; i < counts.paternal_aunts; ++i) fam.add(Role::aunt_uncle, Sex::female, pgm, pgf);
  for (int i = 0; i < counts.paternal_uncles; ++i) fam.add(Role::aunt_uncle, Sex::male, pgm, pgf);

  // Children need a second parent; a married-in spouse is added only then.
  auto add_children = [&](std::size_t parent, int daughters, int sons, Role role) {
    if (daughters + sons == 0) return;
    const Sex other = fam.members[parent].sex == Sex::female ? Sex::male : Sex::female;
    const std::size_t spouse = fam.add(Role::spouse, other, kNoParent, kNoParent);
    fam.partner[spouse] = parent;
    fam.partner[parent] = spouse;
    const std::size_t mum = other == Sex::female ? spouse : parent;
    const std::size_t dad = other == Sex::female ? parent : spouse;
    for (int i = 0; i < daughters; ++i) fam.add(role, Sex::female, mum, dad);
    for (int i = 0; i < sons; ++i) fam.add(role, Sex::male, mum, dad);
  };
  add_children(proband, counts.daughters, counts.sons, Role::child);
  for (std::size_t s = 0; s < siblings.size(); ++s)
    add_children(siblings[s], counts.sibling_children[s].first, counts.sibling_children[s].second,
                 Role::niece_nephew);

  for (std::size_t j = 0; j < fam.members.size(); ++j)
    fam.members[j].id = id_prefix + std::to_string(j + 1);
  fam.counselee = proband;
  return fam;
}

FamilyDraft sample_structure(Rng& rng, int max_count, const std::string& id_prefix) {
  auto counts = draw_counts(rng, max_count);
  const Sex sex = std::bernoulli_distribution(0.5)(rng) ? Sex::female : Sex::male;
  return build_structure(counts, sex, id_prefix);
}

namespace {

// Parents are always generated before their children in this order.
int generation_rank(Role r) {
  switch (r) {
    case Role::grandmother: return 0;
    case Role::grandfather: return 1;
    case Role::mother:
    case Role::father: return 2;
    case Role::aunt_uncle: return 3;
    case Role::counselee:
    case Role::sibling: return 4;
    case Role::spouse: return 5;
    case Role::child:
    case Role::niece_nephew: return 6;
  }
  return 7;
}

std::vector<std::size_t> generation_order(const FamilyDraft& fam) {
  std::vector<std::size_t> order(fam.members.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return generation_rank(fam.roles[a]) < generation_rank(fam.roles[b]);
  });
  return order;
}

int round_clamp(double age) {
  const double r = std::floor(age + 0.5);
  return static_cast<int>(std::clamp(r, 1.0, static_cast<double>(kCensoredAge)));
}

int transmit(int parent_state, Rng& rng) {
  if (parent_state == 0) return 0;
  if (parent_state == 2) return 1;
  return std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
}

}  // namespace

void assign_genotypes(FamilyDraft& fam, const AlleleFrequencies& freqs, const GenotypeSpace& space,
                      Rng& rng) {
  freqs.check(space);
  fam.genotypes.assign(fam.members.size(), 0);
  std::vector<int> states(space.n_genes());
  for (auto j : generation_order(fam)) {
    const bool founder = fam.mother[j] == kNoParent;
    for (std::size_t g = 0; g < space.n_genes(); ++g) {
      if (founder) {
        std::bernoulli_distribution allele(freqs.q[g]);
        states[g] = int{allele(rng)} + int{allele(rng)};
      } else {
        states[g] = transmit(space.state(fam.genotypes[fam.mother[j]], g), rng) +
                    transmit(space.state(fam.genotypes[fam.father[j]], g), rng);
      }
    }
    fam.genotypes[j] = space.index(states);
  }
}

void assign_ages(FamilyDraft& fam, const AgeModel& model, Rng& rng) {
  auto& m = fam.members;
  auto normal = [&](double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng); };
  // Every child is at least min_mother_gap years younger than its mother.
  auto capped = [&](double age, std::size_t mum) {
    const int mother_age = m[mum].current_age;
    age = std::min(std::floor(age + 0.5), static_cast<double>(mother_age - model.min_mother_gap));
    return round_clamp(age);
  };
  auto child_age = [&](std::size_t mum) {
    return capped(normal(m[mum].current_age - model.child_offset, model.child_sd), mum);
  };
  for (auto j : generation_order(fam)) {
    switch (fam.roles[j]) {
      case Role::grandmother:
        m[j].current_age = round_clamp(normal(model.grandmother_mean, model.grandmother_sd));
        break;
      case Role::grandfather:
      case Role::spouse:
        m[j].current_age = round_clamp(normal(m[fam.partner[j]].current_age, model.spouse_sd));
        break;
      case Role::aunt_uncle: {
        // Centred on the core parent descending from the same grandmother.
        const std::size_t core = fam.mother[j] == fam.mother[fam.mother[fam.counselee]]
                                     ? fam.mother[fam.counselee]
                                     : fam.father[fam.counselee];
        m[j].current_age = capped(normal(m[core].current_age, model.spouse_sd), fam.mother[j]);
        break;
      }
      default:
        m[j].current_age = child_age(fam.mother[j]);
        break;
    }
  }
}

CancerSampler::CancerSampler(PenetranceSet tables) : tables_(std::move(tables)) {
  const auto& space = tables_.space();
  const std::size_t k = space.size();
  const auto& tabs = tables_.tables();
  cdf_.assign(tabs.size() * 2 * k * kMaxAge, 0.0);
  applies_.assign(tabs.size() * 2, 0);
  for (std::size_t r = 0; r < tabs.size(); ++r)
    for (Sex sex : {Sex::female, Sex::male}) {
      const std::size_t s = sex == Sex::female ? 0 : 1;
      applies_[r * 2 + s] = tabs[r].applies_to(sex);
      if (!tabs[r].applies_to(sex)) continue;
      for (Genotype g = 0; g < k; ++g) {
        auto surv = combined_survival(tabs[r], space, g, sex);
        double* out = &cdf_[((r * 2 + s) * k + g) * kMaxAge];
        for (int t = 1; t <= kMaxAge; ++t) out[t - 1] = 1.0 - surv[t];
      }
    }
}

int CancerSampler::draw_onset(std::size_t cancer, Sex sex, Genotype genotype, Rng& rng) const {
  const std::size_t s = sex == Sex::female ? 0 : 1;
  if (!applies_[cancer * 2 + s]) return kCensoredAge;
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double* cdf = &cdf_[((cancer * 2 + s) * tables_.space().size() + genotype) * kMaxAge];
  const double* hit = std::upper_bound(cdf, cdf + kMaxAge, u);
  return hit == cdf + kMaxAge ? kCensoredAge : static_cast<int>(hit - cdf) + 1;
}

void assign_cancers(FamilyDraft& fam, const CancerSampler& sampler, Rng& rng) {
  const auto& tabs = sampler.tables().tables();
  if (fam.genotypes.size() != fam.members.size())
    throw InvalidArgument("genotypes must be assigned before cancers");
  fam.cancers.clear();
  for (const auto& t : tabs) fam.cancers.push_back(t.cancer());
  fam.event_ages.assign(fam.members.size(), std::vector<int>(tabs.size(), kCensoredAge));
  for (std::size_t j = 0; j < fam.members.size(); ++j) {
    auto& ind = fam.members[j];
    ind.phenotypes.assign(tabs.size(), PhenotypeRecord{});
    for (std::size_t r = 0; r < tabs.size(); ++r) {
      const int onset = sampler.draw_onset(r, ind.sex, fam.genotypes[j], rng);
      fam.event_ages[j][r] = onset;
      auto& rec = ind.phenotypes[r];
      rec.affected = onset <= std::min(ind.current_age, kMaxAge);
      rec.observed_age = rec.affected ? onset : ind.current_age;
    }
  }
}

SimulatedFamily simulate_family(const SimulationScenario& scenario, const CancerSampler& sampler,
                                std::size_t family_index) {
  Rng rng = make_rng(scenario.seed, {family_index});
  const std::string prefix = scenario.id_prefix + std::to_string(family_index + 1) + "_";
  FamilyDraft fam = sample_structure(rng, scenario.max_relative_count, prefix);
  assign_genotypes(fam, scenario.allele_freqs, scenario.tables.space(), rng);
  assign_ages(fam, scenario.ages, rng);
  assign_cancers(fam, sampler, rng);
  return SimulatedFamily{fam.to_pedigree(), std::move(fam.genotypes), std::move(fam.event_ages),
                         std::move(fam.roles)};
}

std::vector<SimulatedFamily> simulate_families(const SimulationScenario& scenario,
                                               unsigned threads) {
  CancerSampler sampler(scenario.tables);
  std::vector<SimulatedFamily> out(scenario.n_families);
  parallel_for(scenario.n_families, threads,
               [&](std::size_t i) { out[i] = simulate_family(scenario, sampler, i); });
  return out;
}

}  // namespace mendelboost
