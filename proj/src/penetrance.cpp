#include "mendelboost/penetrance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mendelboost/error.hpp"

namespace mendelboost {

Survival survival_from_density(std::span<const double> density) {
  Survival s(density.size() + 1);
  s[0] = 1.0;
  double cum = 0.0;
  for (std::size_t t = 0; t < density.size(); ++t) {
    cum += density[t];
    s[t + 1] = std::max(0.0, 1.0 - cum);
  }
  return s;
}

Density density_from_survival(std::span<const double> survival) {
  if (survival.empty()) return {};
  Density f(survival.size() - 1);
  for (std::size_t t = 0; t < f.size(); ++t)
    f[t] = std::max(0.0, survival[t] - survival[t + 1]);
  return f;
}

double lifetime_risk(std::span<const double> density) {
  return std::accumulate(density.begin(), density.end(), 0.0);
}

void check_density(std::span<const double> density) {
  if (density.size() != static_cast<std::size_t>(kMaxAge))
    throw InvalidArgument("density must cover ages 1.." + std::to_string(kMaxAge));
  for (double v : density)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("density has a negative entry");
  if (lifetime_risk(density) > 1.0 + 1e-12) throw InvalidArgument("density sums to more than 1");
}

PenetranceTable::PenetranceTable(std::string cancer, std::optional<Sex> restricted_to)
    : cancer_(std::move(cancer)), restricted_to_(restricted_to) {}

void PenetranceTable::set_density(Sex sex, std::string carrier_key, Density density) {
  check_density(density);
  entries_[{sex, std::move(carrier_key)}] = std::move(density);
}

bool PenetranceTable::has(Sex sex, std::string_view carrier_key) const {
  return entries_.find(std::pair<Sex, std::string>{sex, std::string(carrier_key)}) !=
         entries_.end();
}

const Density& PenetranceTable::density(Sex sex, std::string_view carrier_key) const {
  auto it = entries_.find(std::pair<Sex, std::string>{sex, std::string(carrier_key)});
  if (it == entries_.end())
    throw InvalidArgument("no " + cancer_ + " penetrance for sex " + std::string(to_string(sex)) +
                          ", key " + std::string(carrier_key));
  return it->second;
}

GenotypeSpace::GenotypeSpace(std::vector<std::string> genes) : genes_(std::move(genes)) {
  if (genes_.size() > 6) throw InvalidArgument("at most 6 genes are supported");
  for (std::size_t g = 0; g < genes_.size(); ++g) size_ *= 3;
}

int GenotypeSpace::state(Genotype g, std::size_t gene) const {
  for (std::size_t i = 0; i < gene; ++i) g /= 3;
  return static_cast<int>(g % 3);
}

Genotype GenotypeSpace::index(std::span<const int> states) const {
  if (states.size() != genes_.size()) throw InvalidArgument("genotype length mismatch");
  Genotype idx = 0;
  for (std::size_t g = states.size(); g-- > 0;) {
    if (states[g] < 0 || states[g] > 2) throw InvalidArgument("gene state outside {0,1,2}");
    idx = idx * 3 + static_cast<Genotype>(states[g]);
  }
  return idx;
}

AlleleFrequencies AlleleFrequencies::uniform(std::size_t n_genes, double q) {
  return AlleleFrequencies{std::vector<double>(n_genes, q)};
}

void AlleleFrequencies::check(const GenotypeSpace& space) const {
  if (q.size() != space.n_genes()) throw InvalidArgument("allele frequency count mismatch");
  for (double v : q)
    if (!(v > 0.0 && v < 1.0)) throw InvalidArgument("allele frequency outside (0, 1)");
}

std::vector<double> prevalence(const AlleleFrequencies& freqs, const GenotypeSpace& space) {
  freqs.check(space);
  std::vector<double> out(space.size(), 1.0);
  for (std::size_t g = 0; g < space.n_genes(); ++g) {
    const double q = freqs.q[g];
    const std::array<double, 3> hw{(1 - q) * (1 - q), 2 * q * (1 - q), q * q};
    for (Genotype idx = 0; idx < space.size(); ++idx) out[idx] *= hw[space.state(idx, g)];
  }
  return out;
}

std::array<double, 3> transmission(int parent_a, int parent_b) {
  if (parent_a < 0 || parent_a > 2 || parent_b < 0 || parent_b > 2)
    throw InvalidArgument("gene state outside {0,1,2}");
  // Probability each parent passes the mutated allele.
  const double pa = parent_a / 2.0;
  const double pb = parent_b / 2.0;
  return {(1 - pa) * (1 - pb), pa * (1 - pb) + (1 - pa) * pb, pa * pb};
}

Survival combined_survival(const PenetranceTable& table, const GenotypeSpace& space,
                           Genotype genotype, Sex sex) {
  if (!table.applies_to(sex)) return Survival(kMaxAge + 1, 1.0);
  if (!GenotypeSpace::carries_any(genotype))
    return survival_from_density(table.density(sex, kNoncarrier));
  Survival s(kMaxAge + 1, 1.0);
  for (std::size_t g = 0; g < space.n_genes(); ++g) {
    if (space.state(genotype, g) == 0) continue;
    auto sg = survival_from_density(table.density(sex, space.genes()[g]));
    for (std::size_t t = 0; t < s.size(); ++t) s[t] *= sg[t];
  }
  return s;
}

PenetranceTable misspecify(const PenetranceTable& table, double exponent) {
  if (!(exponent > 0.0) || !std::isfinite(exponent))
    throw InvalidArgument("survival exponent must be positive");
  PenetranceTable out(table.cancer(), table.restricted_to());
  for (const auto& [key, density] : table.entries()) {
    auto s = survival_from_density(density);
    for (double& v : s) v = std::pow(v, exponent);
    out.set_density(key.first, key.second, density_from_survival(s));
  }
  return out;
}

Density scale_to_lifetime_risk(std::span<const double> density, double target) {
  if (!(target > 0.0 && target <= 1.0)) throw InvalidArgument("target lifetime risk outside (0, 1]");
  const double total = lifetime_risk(density);
  if (!(total > 0.0)) throw InvalidArgument("cannot rescale an all-zero density");
  Density out(density.begin(), density.end());
  for (double& v : out) v *= target / total;
  return out;
}

PenetranceSet::PenetranceSet(GenotypeSpace space, std::vector<PenetranceTable> tables)
    : space_(std::move(space)), tables_(std::move(tables)) {}

const PenetranceTable* PenetranceSet::find(std::string_view cancer) const {
  for (const auto& t : tables_)
    if (t.cancer() == cancer) return &t;
  return nullptr;
}

const PenetranceTable& PenetranceSet::at(std::string_view cancer) const {
  if (auto* t = find(cancer)) return *t;
  throw InvalidArgument("no penetrance table for cancer " + std::string(cancer));
}

PenetranceSet PenetranceSet::subset(std::span<const std::string> cancers) const {
  std::vector<PenetranceTable> kept;
  for (const auto& c : cancers) kept.push_back(at(c));
  return PenetranceSet(space_, std::move(kept));
}

PenetranceSet PenetranceSet::with_exponent(std::string_view cancer, double exponent) const {
  PenetranceSet out = *this;
  for (auto& t : out.tables_)
    if (t.cancer() == cancer) t = misspecify(t, exponent);
  at(cancer);
  return out;
}

void PenetranceSet::check_complete() const {
  for (const auto& t : tables_) {
    for (Sex sex : {Sex::female, Sex::male}) {
      if (!t.applies_to(sex)) continue;
      t.density(sex, kNoncarrier);
      for (const auto& gene : space_.genes()) t.density(sex, gene);
    }
  }
}

// ---------------------------------------------------------------------------

Density discrete_weibull_density(const WeibullShape& w) {
  if (!(w.shape > 1.0) || !(w.modal_age > 0.0))
    throw InvalidArgument("Weibull shape must exceed 1 and modal age must be positive");
  const double scale = w.modal_age / std::pow((w.shape - 1.0) / w.shape, 1.0 / w.shape);
  auto cdf = [&](double t) { return 1.0 - std::exp(-std::pow(t / scale, w.shape)); };
  Density f(kMaxAge);
  for (int t = 1; t <= kMaxAge; ++t) f[t - 1] = cdf(t) - cdf(t - 1);
  return scale_to_lifetime_risk(f, w.lifetime_risk);
}

std::string_view to_string(CrcEcLevel level) { return level == CrcEcLevel::low ? "low" : "high"; }
std::string_view to_string(GcLevel level) { return level == GcLevel::low ? "low" : "high"; }

CrcEcLevel parse_crc_ec_level(std::string_view text) {
  if (text == "low") return CrcEcLevel::low;
  if (text == "high") return CrcEcLevel::high;
  throw ParseError("penetrance level must be low or high, got '" + std::string(text) + "'");
}

GcLevel parse_gc_level(std::string_view text) {
  if (text == "low") return GcLevel::low;
  if (text == "high") return GcLevel::high;
  throw ParseError("GC level must be low or high, got '" + std::string(text) + "'");
}

const std::vector<std::string>& mmr_genes() {
  static const std::vector<std::string> genes{"MLH1", "MSH2", "MSH6"};
  return genes;
}

namespace {

struct CurveSpec {
  const char* key;
  double risk_female;
  double risk_male;
  double modal_age;
};

// Literature-scale lifetime risks to age 94 for the high-penetrance scenario.
constexpr CurveSpec kCrcCurves[] = {
    {"noncarrier", 0.045, 0.050, 76.0},
    {"MLH1", 0.48, 0.58, 56.0},
    {"MSH2", 0.46, 0.54, 56.0},
    {"MSH6", 0.18, 0.24, 62.0},
};
constexpr CurveSpec kEcCurves[] = {
    {"noncarrier", 0.028, 0.0, 66.0},
    {"MLH1", 0.42, 0.0, 54.0},
    {"MSH2", 0.46, 0.0, 54.0},
    {"MSH6", 0.34, 0.0, 58.0},
};
constexpr double kGcModalNoncarrier = 76.0;
constexpr double kGcModalCarrier = 60.0;
constexpr double kGcRegistryRisk = 0.0085;
constexpr double kLowCarrierRisk = 0.2;

}  // namespace

PenetranceSet standin_penetrance(CrcEcLevel crc_ec, GcLevel gc) {
  const auto& genes = mmr_genes();

  PenetranceTable crc("CRC");
  for (const auto& c : kCrcCurves) {
    for (Sex sex : {Sex::female, Sex::male}) {
      const double risk = sex == Sex::female ? c.risk_female : c.risk_male;
      Density f = discrete_weibull_density({risk, c.modal_age});
      if (crc_ec == CrcEcLevel::low && c.key != kNoncarrier)
        f = scale_to_lifetime_risk(f, kLowCarrierRisk);
      crc.set_density(sex, c.key, std::move(f));
    }
  }

  PenetranceTable ec("EC", Sex::female);
  for (const auto& c : kEcCurves) {
    Density f = discrete_weibull_density({c.risk_female, c.modal_age});
    if (crc_ec == CrcEcLevel::low && c.key != kNoncarrier)
      f = scale_to_lifetime_risk(f, kLowCarrierRisk);
    ec.set_density(Sex::female, c.key, std::move(f));
  }

  PenetranceTable gct("GC");
  for (Sex sex : {Sex::female, Sex::male}) {
    if (gc == GcLevel::high) {
      gct.set_density(sex, std::string(kNoncarrier),
                      discrete_weibull_density({0.05, kGcModalNoncarrier}));
      for (const auto& g : genes)
        gct.set_density(sex, g, discrete_weibull_density({0.5, kGcModalCarrier}));
    } else {
      Density base = discrete_weibull_density({kGcRegistryRisk, kGcModalNoncarrier});
      Density doubled = base;
      for (double& v : doubled) v *= 2.0;
      gct.set_density(sex, std::string(kNoncarrier), base);
      for (const auto& g : genes) gct.set_density(sex, g, doubled);
    }
  }

  return PenetranceSet(GenotypeSpace(genes), {std::move(crc), std::move(ec), std::move(gct)});
}

}  // namespace mendelboost
