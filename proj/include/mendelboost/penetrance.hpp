#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mendelboost/pedigree.hpp"

namespace mendelboost {

// Annual event probabilities; entry t-1 holds P(T = t) for t = 1..kMaxAge.
using Density = std::vector<double>;
// Entry t holds P(T > t) for t = 0..kMaxAge, so survival[0] == 1.
using Survival = std::vector<double>;

inline constexpr std::string_view kNoncarrier = "noncarrier";

Survival survival_from_density(std::span<const double> density);
Density density_from_survival(std::span<const double> survival);
double lifetime_risk(std::span<const double> density);

// Throws InvalidArgument unless the density has kMaxAge non-negative entries
// summing to at most one.
void check_density(std::span<const double> density);

// Densities for one cancer keyed by (sex, carrier key). The carrier key is
// kNoncarrier or the name of the single gene carried.
class PenetranceTable {
 public:
  explicit PenetranceTable(std::string cancer, std::optional<Sex> restricted_to = std::nullopt);

  const std::string& cancer() const { return cancer_; }
  std::optional<Sex> restricted_to() const { return restricted_to_; }
  bool applies_to(Sex sex) const { return !restricted_to_ || *restricted_to_ == sex; }

  void set_density(Sex sex, std::string carrier_key, Density density);
  bool has(Sex sex, std::string_view carrier_key) const;
  const Density& density(Sex sex, std::string_view carrier_key) const;
  const std::map<std::pair<Sex, std::string>, Density, std::less<>>& entries() const {
    return entries_;
  }

 private:
  std::string cancer_;
  std::optional<Sex> restricted_to_;
  std::map<std::pair<Sex, std::string>, Density, std::less<>> entries_;
};

using Genotype = std::uint32_t;

// Joint genotype over G genes, each in {0, 1, 2} copies of the mutated
// allele. Index = sum_g state_g * 3^g.
class GenotypeSpace {
 public:
  explicit GenotypeSpace(std::vector<std::string> genes);

  const std::vector<std::string>& genes() const { return genes_; }
  std::size_t n_genes() const { return genes_.size(); }
  std::size_t size() const { return size_; }

  int state(Genotype g, std::size_t gene) const;
  Genotype index(std::span<const int> states) const;
  // Every gene noncarrier iff index 0.
  static bool carries_any(Genotype g) { return g != 0; }

 private:
  std::vector<std::string> genes_;
  std::size_t size_ = 1;
};

struct AlleleFrequencies {
  std::vector<double> q;  // aligned with GenotypeSpace::genes()

  static AlleleFrequencies uniform(std::size_t n_genes, double q);
  void check(const GenotypeSpace& space) const;
};

// Hardy-Weinberg, independent across genes; indexed by Genotype.
std::vector<double> prevalence(const AlleleFrequencies& freqs, const GenotypeSpace& space);

// Child state distribution for one gene given parental states.
std::array<double, 3> transmission(int parent_a, int parent_b);

// Survival for a full genotype: the noncarrier curve when nothing is
// carried, otherwise the product of the single-gene carrier curves.
// Zygosity does not change penetrance. All ones when the cancer does not
// apply to `sex`.
Survival combined_survival(const PenetranceTable& table, const GenotypeSpace& space,
                           Genotype genotype, Sex sex);

// Raises every survival curve of the table to `exponent`.
PenetranceTable misspecify(const PenetranceTable& table, double exponent);

Density scale_to_lifetime_risk(std::span<const double> density, double target);

// Collection of per-cancer tables sharing one gene list.
class PenetranceSet {
 public:
  PenetranceSet() = default;
  PenetranceSet(GenotypeSpace space, std::vector<PenetranceTable> tables);

  const GenotypeSpace& space() const { return space_; }
  const std::vector<PenetranceTable>& tables() const { return tables_; }
  const PenetranceTable* find(std::string_view cancer) const;
  const PenetranceTable& at(std::string_view cancer) const;

  // Keeps only the named cancers, in the given order.
  PenetranceSet subset(std::span<const std::string> cancers) const;
  PenetranceSet with_exponent(std::string_view cancer, double exponent) const;
  // Throws if a carried gene lacks a density for a sex the cancer applies to.
  void check_complete() const;

 private:
  GenotypeSpace space_{{}};
  std::vector<PenetranceTable> tables_;
};

// ---------------------------------------------------------------------------
// Stand-in tables. Shapes follow a discrete Weibull curve truncated at
// kMaxAge and rescaled to the requested lifetime risk.

struct WeibullShape {
  double lifetime_risk;
  double modal_age;
  double shape = 4.0;
};

Density discrete_weibull_density(const WeibullShape& w);

enum class CrcEcLevel { low, high };
enum class GcLevel { high, low };

std::string_view to_string(CrcEcLevel level);
std::string_view to_string(GcLevel level);
CrcEcLevel parse_crc_ec_level(std::string_view text);
GcLevel parse_gc_level(std::string_view text);

const std::vector<std::string>& mmr_genes();
inline constexpr double kSimulationAlleleFrequency = 0.01;

// Data-generating tables for colorectal (CRC), endometrial (EC, female only)
// and gastric (GC) cancer over MLH1/MSH2/MSH6.
//  high CRC/EC: literature-scale carrier risks;
//  low CRC/EC:  every single-gene carrier curve rescaled to lifetime risk 0.2;
//  high GC:     noncarrier 0.05, single-gene carriers 0.5;
//  low GC:      registry-scale noncarrier curve, carriers at twice its density.
PenetranceSet standin_penetrance(CrcEcLevel crc_ec, GcLevel gc);

}  // namespace mendelboost
