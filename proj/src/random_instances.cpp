#include "mendelboost/random_instances.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <utility>

#include "mendelboost/error.hpp"
#include "mendelboost/mendelian.hpp"

namespace mendelboost {

Density random_density(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Density d(kMaxAge);
  for (auto& v : d) v = u(rng) * u(rng);
  double total = 0.0;
  for (double v : d) total += v;
  double risk = 0.05 + 0.75 * u(rng);
  for (auto& v : d) v *= risk / total;
  return d;
}

PenetranceSet random_penetrance(const std::vector<std::string>& genes, Rng& rng) {
  std::vector<PenetranceTable> tables;
  const std::pair<const char*, std::optional<Sex>> cancers[] = {{"A", std::nullopt},
                                                                {"B", Sex::female}};
  for (const auto& [name, restricted] : cancers) {
    PenetranceTable t(name, restricted);
    for (Sex sex : {Sex::female, Sex::male}) {
      if (!t.applies_to(sex)) continue;
      t.set_density(sex, std::string(kNoncarrier), random_density(rng));
      for (const auto& g : genes) t.set_density(sex, g, random_density(rng));
    }
    tables.push_back(std::move(t));
  }
  return PenetranceSet(GenotypeSpace(genes), std::move(tables));
}

PhenotypeRecord random_record(Rng& rng, int current_age) {
  std::uniform_int_distribution<int> kind(0, 2);
  switch (kind(rng)) {
    case 0: return {};
    case 1: return {false, current_age};
    default: {
      std::uniform_int_distribution<int> age(1, std::min(current_age, kMaxAge));
      return {true, age(rng)};
    }
  }
}

Pedigree random_pedigree(Rng& rng, std::size_t n) {
  if (n == 0 || n == 2) throw InvalidArgument("random pedigree size must be 1 or at least 3");
  std::vector<Individual> members;
  std::uniform_int_distribution<int> age_dist(20, 95);
  std::bernoulli_distribution coin(0.5);
  auto random_sex = [&] { return coin(rng) ? Sex::female : Sex::male; };
  auto add = [&](Sex sex, std::optional<std::string> mother, std::optional<std::string> father) {
    Individual ind;
    ind.id = "p" + std::to_string(members.size() + 1);
    ind.sex = sex;
    ind.mother_id = std::move(mother);
    ind.father_id = std::move(father);
    ind.current_age = age_dist(rng);
    members.push_back(std::move(ind));
    return members.size() - 1;
  };
  if (n == 1) {
    add(random_sex(), std::nullopt, std::nullopt);
  } else {
    struct Couple {
      std::string mother, father;
    };
    std::vector<Couple> couples;
    std::size_t f = add(Sex::male, std::nullopt, std::nullopt);
    std::size_t m = add(Sex::female, std::nullopt, std::nullopt);
    couples.push_back({members[m].id, members[f].id});
    std::vector<std::size_t> unmarried = {add(random_sex(), members[m].id, members[f].id)};
    while (members.size() < n) {
      const bool can_marry = !unmarried.empty() && members.size() + 2 <= n;
      if (can_marry && coin(rng)) {
        std::uniform_int_distribution<std::size_t> pick(0, unmarried.size() - 1);
        std::size_t k = pick(rng);
        std::size_t child = unmarried[k];
        unmarried.erase(unmarried.begin() + static_cast<std::ptrdiff_t>(k));
        const bool daughter = members[child].sex == Sex::female;
        std::size_t spouse = add(daughter ? Sex::male : Sex::female, std::nullopt, std::nullopt);
        Couple c = daughter ? Couple{members[child].id, members[spouse].id}
                            : Couple{members[spouse].id, members[child].id};
        couples.push_back(c);
        unmarried.push_back(add(random_sex(), c.mother, c.father));
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, couples.size() - 1);
        const Couple c = couples[pick(rng)];
        unmarried.push_back(add(random_sex(), c.mother, c.father));
      }
    }
  }
  for (auto& ind : members)
    for (int r = 0; r < 2; ++r) ind.phenotypes.push_back(random_record(rng, ind.current_age));
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  std::string counselee = members[pick(rng)].id;
  return Pedigree(std::move(members), counselee, {"A", "B"});
}

OracleCheckReport oracle_check(std::size_t pedigrees, std::uint64_t seed,
                               std::size_t max_members, std::size_t max_genes) {
  if (max_members < 1 || max_genes < 1) throw InvalidArgument("oracle check needs members and genes");
  if (max_members * max_genes > kBruteForceLimit)
    throw InvalidArgument("oracle check: members x genes must not exceed " +
                          std::to_string(kBruteForceLimit));
  std::vector<std::size_t> sizes = {1};
  for (std::size_t s = 3; s <= max_members; ++s) sizes.push_back(s);

  const auto start = std::chrono::steady_clock::now();
  OracleCheckReport report;
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> size_pick(0, sizes.size() - 1), gene_pick(1, max_genes);
  std::uniform_real_distribution<double> freq(0.01, 0.3);
  for (std::size_t i = 0; i < pedigrees; ++i) {
    std::vector<std::string> genes;
    const std::size_t n_genes = gene_pick(rng);
    for (std::size_t g = 0; g < n_genes; ++g) genes.push_back("G" + std::to_string(g + 1));
    PenetranceSet tables = random_penetrance(genes, rng);
    AlleleFrequencies freqs;
    for (std::size_t g = 0; g < n_genes; ++g) freqs.q.push_back(freq(rng));
    Pedigree p = random_pedigree(rng, sizes[size_pick(rng)]);
    auto peeled = carrier_posterior_peeling(p, tables, freqs);
    auto brute = carrier_posterior_bruteforce(p, tables, freqs);
    for (std::size_t g = 0; g < brute.genotype_probabilities.size(); ++g)
      report.max_abs_difference =
          std::max(report.max_abs_difference,
                   std::abs(peeled.genotype_probabilities[g] - brute.genotype_probabilities[g]));
    ++report.pedigrees;
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace mendelboost
