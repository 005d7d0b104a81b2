#include "mendelboost/mendelian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "mendelboost/error.hpp"

namespace mendelboost {

namespace {

constexpr std::size_t kCurveStride = kMaxAge + (kMaxAge + 1);

std::size_t sex_slot(Sex s) { return s == Sex::female ? 0 : 1; }

void check_record(const PhenotypeRecord& rec) {
  if (rec.observed_age < 0 || rec.observed_age > kCensoredAge)
    throw InvalidArgument("observed age " + std::to_string(rec.observed_age) +
                          " outside 0.." + std::to_string(kCensoredAge));
  if (rec.affected && (rec.observed_age < 1 || rec.observed_age > kMaxAge))
    throw InvalidArgument("affected record with diagnosis age outside 1.." +
                          std::to_string(kMaxAge));
}

double record_factor(const PhenotypeRecord& rec, std::span<const double> density,
                     std::span<const double> survival) {
  check_record(rec);
  if (rec.unknown()) return 1.0;
  if (rec.affected) return density[rec.observed_age - 1];
  return survival[std::min(rec.observed_age, kMaxAge)];
}

// Scales v so that its maximum is 1 and returns log of the removed factor.
double rescale(std::span<double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  if (!(m > 0.0)) throw InvalidArgument("family history has zero likelihood under the model");
  for (double& x : v) x /= m;
  return std::log(m);
}

}  // namespace

double phenotype_likelihood(const Individual& individual, std::span<const std::string> cancers,
                            Genotype genotype, const PenetranceSet& tables) {
  if (individual.phenotypes.size() != cancers.size())
    throw InvalidArgument("phenotype count does not match cancer list");
  double lik = 1.0;
  for (std::size_t r = 0; r < cancers.size(); ++r) {
    const auto* table = tables.find(cancers[r]);
    if (!table) continue;
    const auto& rec = individual.phenotypes[r];
    if (!table->applies_to(individual.sex)) {
      check_record(rec);
      continue;
    }
    if (rec.unknown()) continue;
    auto s = combined_survival(*table, tables.space(), genotype, individual.sex);
    auto f = density_from_survival(s);
    lik *= record_factor(rec, f, s);
  }
  return lik;
}

struct CarrierProbabilityEngine::Columns {
  // Pedigree phenotype column for each model cancer, if recorded.
  std::vector<std::optional<std::size_t>> column;
};

CarrierProbabilityEngine::CarrierProbabilityEngine(PenetranceSet tables, AlleleFrequencies freqs)
    : tables_(std::move(tables)), freqs_(std::move(freqs)) {
  const auto& space = tables_.space();
  freqs_.check(space);
  tables_.check_complete();
  n_genes_ = space.n_genes();
  k_ = space.size();
  prior_ = prevalence(freqs_, space);

  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      auto t = transmission(a, b);
      for (int s = 0; s < 3; ++s) gene_transmission_[s * 9 + 3 * a + b] = t[s];
    }

  pair_index_.resize(k_ * k_);
  for (Genotype f = 0; f < k_; ++f)
    for (Genotype m = 0; m < k_; ++m) {
      std::uint32_t idx = 0, radix = 1;
      for (std::size_t g = 0; g < n_genes_; ++g) {
        idx += static_cast<std::uint32_t>(3 * space.state(f, g) + space.state(m, g)) * radix;
        radix *= 9;
      }
      pair_index_[f * k_ + m] = idx;
    }

  const auto& tabs = tables_.tables();
  curves_.assign(tabs.size() * 2 * k_ * kCurveStride, 0.0);
  applies_.assign(tabs.size() * 2, 0);
  for (std::size_t r = 0; r < tabs.size(); ++r) {
    for (Sex sex : {Sex::female, Sex::male}) {
      applies_[r * 2 + sex_slot(sex)] = tabs[r].applies_to(sex);
      if (!tabs[r].applies_to(sex)) continue;
      for (Genotype g = 0; g < k_; ++g) {
        auto s = combined_survival(tabs[r], space, g, sex);
        auto f = density_from_survival(s);
        double* base = &curves_[((r * 2 + sex_slot(sex)) * k_ + g) * kCurveStride];
        std::copy(f.begin(), f.end(), base);
        std::copy(s.begin(), s.end(), base + kMaxAge);
      }
    }
  }
}

CarrierProbabilityEngine::Columns CarrierProbabilityEngine::map_columns(
    const Pedigree& pedigree) const {
  Columns cols;
  for (const auto& t : tables_.tables()) cols.column.push_back(pedigree.cancer_index(t.cancer()));
  return cols;
}

void CarrierProbabilityEngine::member_likelihood(const Pedigree& pedigree, std::size_t member,
                                                 std::span<double> out) const {
  fill_likelihood(pedigree.members().at(member), map_columns(pedigree), out);
}

void CarrierProbabilityEngine::fill_likelihood(const Individual& ind, const Columns& cols,
                                               std::span<double> out) const {
  std::fill(out.begin(), out.end(), 1.0);
  for (std::size_t r = 0; r < cols.column.size(); ++r) {
    if (!cols.column[r]) continue;
    const auto& rec = ind.phenotypes.at(*cols.column[r]);
    if (!applies_[r * 2 + sex_slot(ind.sex)]) {
      check_record(rec);
      continue;
    }
    if (rec.unknown()) continue;
    for (Genotype g = 0; g < k_; ++g) {
      const double* base = &curves_[((r * 2 + sex_slot(ind.sex)) * k_ + g) * kCurveStride];
      out[g] *= record_factor(rec, {base, static_cast<std::size_t>(kMaxAge)},
                              {base + kMaxAge, static_cast<std::size_t>(kMaxAge + 1)});
    }
  }
}

// Sums a child message over the child's genotype for every ordered
// (father, mother) genotype pair, one gene at a time. Output uses the pair
// layout sum_g (3 * father_g + mother_g) * 9^g.
void CarrierProbabilityEngine::child_to_parents(std::span<const double> child,
                                                std::span<double> pairs,
                                                std::vector<double>& scratch) const {
  std::vector<double> cur(child.begin(), child.end());
  std::size_t low = 1;              // 9^g
  std::size_t high = k_;            // 3^(G-g)
  for (std::size_t g = 0; g < n_genes_; ++g) {
    high /= 3;
    scratch.assign(low * 9 * high, 0.0);
    for (std::size_t hi = 0; hi < high; ++hi)
      for (std::size_t p = 0; p < 9; ++p)
        for (std::size_t lo = 0; lo < low; ++lo) {
          double acc = 0.0;
          for (std::size_t s = 0; s < 3; ++s)
            acc += gene_transmission_[s * 9 + p] * cur[lo + s * low + hi * 3 * low];
          scratch[lo + p * low + hi * 9 * low] = acc;
        }
    cur.swap(scratch);
    low *= 9;
  }
  std::copy(cur.begin(), cur.end(), pairs.begin());
}

// Transpose of child_to_parents: distributes a weight over parental pairs to
// the child's genotype.
void CarrierProbabilityEngine::parents_to_child(std::span<const double> pairs,
                                                std::span<double> child,
                                                std::vector<double>& scratch) const {
  std::vector<double> cur(pairs.begin(), pairs.end());
  std::size_t low = k_ * k_;  // becomes 9^g
  std::size_t high = 1;       // 3^(G-1-g)
  for (std::size_t g = n_genes_; g-- > 0;) {
    low /= 9;
    scratch.assign(low * 3 * high, 0.0);
    for (std::size_t hi = 0; hi < high; ++hi)
      for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t lo = 0; lo < low; ++lo) {
          double acc = 0.0;
          for (std::size_t p = 0; p < 9; ++p)
            acc += gene_transmission_[s * 9 + p] * cur[lo + p * low + hi * 9 * low];
          scratch[lo + s * low + hi * 3 * low] = acc;
        }
    cur.swap(scratch);
    high *= 3;
  }
  std::copy(cur.begin(), cur.end(), child.begin());
}

CarrierPosterior CarrierProbabilityEngine::peel(const Pedigree& pedigree) const {
  pedigree.require_valid();
  const auto& members = pedigree.members();
  const std::size_t n = members.size();
  const auto families = nuclear_families(pedigree);
  const std::size_t n_fam = families.size();
  const std::size_t root = pedigree.counselee();
  const auto cols = map_columns(pedigree);

  // Bipartite tree: nodes [0, n) are individuals, [n, n + n_fam) families.
  std::vector<std::vector<std::size_t>> member_families(n);
  for (std::size_t f = 0; f < n_fam; ++f) {
    member_families[families[f].father].push_back(f);
    member_families[families[f].mother].push_back(f);
    for (auto c : families[f].children) member_families[c].push_back(f);
  }

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent_of_node(n + n_fam, kNone);
  std::vector<char> seen(n + n_fam, 0);
  std::vector<std::size_t> order;
  order.reserve(n + n_fam);
  order.push_back(root);
  seen[root] = 1;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const std::size_t node = order[head];
    auto visit = [&](std::size_t next) {
      if (seen[next]) return;
      seen[next] = 1;
      parent_of_node[next] = node;
      order.push_back(next);
    };
    if (node < n) {
      for (auto f : member_families[node]) visit(n + f);
    } else {
      const auto& fam = families[node - n];
      visit(fam.father);
      visit(fam.mother);
      for (auto c : fam.children) visit(c);
    }
  }

  const std::size_t k = k_;
  const std::size_t kk = k * k;
  // Upward message of each individual (over its own genotype), and the
  // product of family messages flowing into it.
  std::vector<double> up(n * k, 0.0);
  std::vector<double> inbound(n * k, 1.0);
  std::vector<double> lik(k);
  std::vector<double> pairs(kk), product(kk), msg(k), scratch;
  double log_scale = 0.0;

  for (std::size_t pos = order.size(); pos-- > 0;) {
    const std::size_t node = order[pos];
    if (node < n) {
      fill_likelihood(members[node], cols, lik);
      std::span<double> u(&up[node * k], k);
      const bool founder = members[node].is_founder();
      for (std::size_t g = 0; g < k; ++g)
        u[g] = lik[g] * inbound[node * k + g] * (founder ? prior_[g] : 1.0);
      if (node != root) log_scale += rescale(u);
      continue;
    }

    const auto& fam = families[node - n];
    const std::size_t anchor = parent_of_node[node];
    std::fill(product.begin(), product.end(), 1.0);
    for (auto c : fam.children) {
      if (c == anchor) continue;
      child_to_parents({&up[c * k], k}, pairs, scratch);
      for (std::size_t i = 0; i < kk; ++i) product[i] *= pairs[i];
    }
    const double* uf = &up[fam.father * k];
    const double* um = &up[fam.mother * k];
    if (anchor == fam.father) {
      for (std::size_t gf = 0; gf < k; ++gf) {
        double acc = 0.0;
        for (std::size_t gm = 0; gm < k; ++gm) acc += um[gm] * product[pair_index_[gf * k + gm]];
        msg[gf] = acc;
      }
    } else if (anchor == fam.mother) {
      for (std::size_t gm = 0; gm < k; ++gm) {
        double acc = 0.0;
        for (std::size_t gf = 0; gf < k; ++gf) acc += uf[gf] * product[pair_index_[gf * k + gm]];
        msg[gm] = acc;
      }
    } else {
      for (std::size_t gf = 0; gf < k; ++gf)
        for (std::size_t gm = 0; gm < k; ++gm) {
          const auto p = pair_index_[gf * k + gm];
          pairs[p] = uf[gf] * um[gm] * product[p];
        }
      parents_to_child(pairs, msg, scratch);
    }
    log_scale += rescale(msg);
    for (std::size_t g = 0; g < k; ++g) inbound[anchor * k + g] *= msg[g];
  }

  CarrierPosterior out;
  out.genotype_probabilities.assign(up.begin() + static_cast<std::ptrdiff_t>(root * k),
                                    up.begin() + static_cast<std::ptrdiff_t>((root + 1) * k));
  const double total = std::accumulate(out.genotype_probabilities.begin(),
                                       out.genotype_probabilities.end(), 0.0);
  if (!(total > 0.0)) throw InvalidArgument("family history has zero likelihood under the model");
  for (double& p : out.genotype_probabilities) p /= total;
  out.carrier_probability = 1.0 - out.genotype_probabilities[0];
  out.log_likelihood = std::log(total) + log_scale;
  return out;
}

CarrierPosterior CarrierProbabilityEngine::enumerate(const Pedigree& pedigree) const {
  pedigree.require_valid();
  const std::size_t n = pedigree.size();
  if (n * n_genes_ > kBruteForceLimit)
    throw InvalidArgument("brute-force enumeration limited to n*G <= " +
                          std::to_string(kBruteForceLimit));
  const std::size_t k = k_;
  const auto& members = pedigree.members();
  const std::size_t root = pedigree.counselee();

  const auto cols = map_columns(pedigree);
  std::vector<double> lik(n * k);
  for (std::size_t j = 0; j < n; ++j) fill_likelihood(members[j], cols, {&lik[j * k], k});

  // Full joint transmission table T[child][pair].
  std::vector<double> trans(k * k * k);
  const auto& space = tables_.space();
  for (Genotype c = 0; c < k; ++c)
    for (Genotype f = 0; f < k; ++f)
      for (Genotype m = 0; m < k; ++m) {
        double t = 1.0;
        for (std::size_t g = 0; g < n_genes_; ++g)
          t *= transmission(space.state(f, g), space.state(m, g))[space.state(c, g)];
        trans[(c * k + f) * k + m] = t;
      }

  std::vector<double> joint(k, 0.0);
  std::vector<Genotype> config(n, 0);
  while (true) {
    double p = 1.0;
    for (std::size_t j = 0; j < n && p > 0.0; ++j) {
      const auto mi = pedigree.mother_of(j);
      const auto fi = pedigree.father_of(j);
      const double prior = members[j].is_founder()
                               ? prior_[config[j]]
                               : trans[(config[j] * k + config[fi]) * k + config[mi]];
      p *= prior * lik[j * k + config[j]];
    }
    joint[config[root]] += p;

    std::size_t j = 0;
    while (j < n && ++config[j] == k) config[j++] = 0;
    if (j == n) break;
  }

  CarrierPosterior out;
  const double total = std::accumulate(joint.begin(), joint.end(), 0.0);
  if (!(total > 0.0)) throw InvalidArgument("family history has zero likelihood under the model");
  out.genotype_probabilities = joint;
  for (double& p : out.genotype_probabilities) p /= total;
  out.carrier_probability = 1.0 - out.genotype_probabilities[0];
  out.log_likelihood = std::log(total);
  return out;
}

CarrierPosterior carrier_posterior_peeling(const Pedigree& pedigree, const PenetranceSet& tables,
                                           const AlleleFrequencies& freqs) {
  return CarrierProbabilityEngine(tables, freqs).peel(pedigree);
}

CarrierPosterior carrier_posterior_bruteforce(const Pedigree& pedigree,
                                              const PenetranceSet& tables,
                                              const AlleleFrequencies& freqs) {
  return CarrierProbabilityEngine(tables, freqs).enumerate(pedigree);
}

}  // namespace mendelboost
