#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mendelboost/booster.hpp"
#include "mendelboost/evaluation.hpp"
#include "mendelboost/penetrance.hpp"

namespace mendelboost {

// Cancers modelled by the experiments, and the sex each applies to (EC is
// female-only).
const std::vector<std::string>& standard_cancers();
CancerSite cancer_site(const std::string& cancer);

enum class ModelKind { mendelian, gb, gb_with_mendelian, platt_on, isotonic_on };
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

// A cancer used by a Mendelian model, with the survival exponent applied to
// the data-generating curve (1 = correctly specified).
struct PenetranceChoice {
  std::string cancer;
  double exponent = 1.0;
};

struct ModelSpec {
  std::string id;
  std::string description;
  ModelKind kind = ModelKind::mendelian;
  std::vector<PenetranceChoice> penetrance;  // mendelian
  std::vector<std::string> features;         // gb, gb_with_mendelian
  std::string base;                          // id of the Mendelian model to extend or recalibrate
  BoostParams boost;
};

enum class Validation { mc_cv, bootstrap };

struct ExperimentConfig {
  CrcEcLevel train_penetrance = CrcEcLevel::low;
  CrcEcLevel test_penetrance = CrcEcLevel::low;
  GcLevel gc_penetrance = GcLevel::high;
  std::size_t datasets = 20;
  std::size_t families = 2000;
  std::size_t replicates = 20;
  std::size_t bootstrap_samples = 20;
  Validation validation = Validation::mc_cv;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string baseline = "1";
  OeRule oe_rule = OeRule::log_ratio;
  bool include_counselee = true;
  std::vector<ModelSpec> models;

  bool transportability() const { return train_penetrance != test_penetrance; }
  const ModelSpec& model(const std::string& id) const;
  void check() const;
};

inline constexpr double kMisspecifiedExponent = 0.5;

// Models 1-10: misspecified Mendelian, GB with and without Mendelian
// initialization, oracle Mendelian models and the two recalibrators.
std::vector<ModelSpec> default_models();
// Models 15.. : misspecified CRC/EC Mendelian model with GC at each exponent.
std::vector<ModelSpec> gc_exponent_sweep(const std::vector<double>& exponents = {0.25, 0.5, 2.0,
                                                                                4.0});
ExperimentConfig default_experiment();

// INI file with an [experiment] section and optional [model:<id>] sections.
// `models = default, gc_sweep` selects presets; model sections add or
// replace entries by id.
ExperimentConfig load_config(std::istream& in);
ExperimentConfig load_config_file(const std::string& path);

// One row per model: id, kind, penetrances with exponents, features, base,
// boosting iterations and description.
std::string list_models(const ExperimentConfig& config);

struct ExperimentResult {
  std::vector<std::string> model_ids;
  // raw[dataset][replicate][model]; bootstrap runs have one replicate.
  std::vector<std::vector<std::vector<MetricReport>>> raw;
  std::vector<AggregateRow> aggregate;
  std::size_t resampled_splits = 0;
};

ExperimentResult run(const ExperimentConfig& config);

void write_metrics_csv(std::ostream& out, const ExperimentResult& result);
void write_aggregate_csv(std::ostream& out, const ExperimentResult& result);
// Decile tables of the first dataset, one block per (model, replicate).
void write_deciles_csv(std::ostream& out, const ExperimentResult& result);

}  // namespace mendelboost
