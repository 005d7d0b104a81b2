#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mendelboost {

enum class Metric { oe, auc, rbs, cal_intercept, cal_slope };
inline constexpr std::array<Metric, 5> kMetrics = {Metric::oe, Metric::auc, Metric::rbs,
                                                   Metric::cal_intercept, Metric::cal_slope};
std::string_view to_string(Metric metric);

double oe(std::span<const int> labels, std::span<const double> predictions);
// Mann-Whitney statistic; tied predictions count one half.
double auc(std::span<const int> labels, std::span<const double> predictions);
double rbs(std::span<const int> labels, std::span<const double> predictions);

struct CalibrationFit {
  double intercept = 0.0;  // slope fixed at 1, logit(p) as offset
  double slope = 1.0;      // free intercept
};
CalibrationFit calibration_intercept_slope(std::span<const int> labels,
                                           std::span<const double> predictions);

inline constexpr double kWilsonZ = 1.959963984540054;
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n,
                                          double z = kWilsonZ);

// Linear-interpolation (type 7) quantile of sorted data.
double quantile(std::span<const double> sorted, double q);
std::pair<double, double> percentile_interval(std::span<const double> values, double lo = 0.025,
                                              double hi = 0.975);

struct DecileBin {
  double mean_prediction = 0.0;
  double observed_fraction = 0.0;
  std::size_t n = 0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Bins at the prediction quantiles 0.1, ..., 0.9; duplicate edges merge
// bins, values equal to an edge fall in the lower bin, empty bins are dropped.
std::vector<DecileBin> decile_table(std::span<const int> labels,
                                    std::span<const double> predictions, int bins = 10);

struct MetricReport {
  static constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
  double oe = kUndefined;
  double auc = kUndefined;
  double rbs = kUndefined;
  double cal_intercept = kUndefined;
  double cal_slope = kUndefined;
  std::vector<DecileBin> deciles;

  double get(Metric metric) const;
  double& get(Metric metric);
};

// Metrics that cannot be computed (single class, separation) are left NaN.
MetricReport evaluate_predictions(std::span<const int> labels,
                                  std::span<const double> predictions);

enum class OeRule { log_ratio, abs_difference };

// True when `candidate` is strictly better than `baseline`. NaN never wins.
bool better(Metric metric, double candidate, double baseline, OeRule rule = OeRule::log_ratio);

// Percentage of paired units where candidate beats baseline.
double improvement_percentage(Metric metric, std::span<const double> candidate,
                              std::span<const double> baseline,
                              OeRule rule = OeRule::log_ratio);

// ---------------------------------------------------------------------------
// Validation schemes

// A model under evaluation. fit_predict trains on the `train` family indices
// and returns predictions for the `test` indices. Untrainable models ignore
// `train`.
struct ModelProcedure {
  std::string name;
  bool trainable = true;
  std::function<std::vector<double>(std::span<const std::size_t> train,
                                    std::span<const std::size_t> test, std::uint64_t seed)>
      fit_predict;
};

struct ValidationResult {
  std::vector<std::vector<MetricReport>> reports;  // [replicate][model]
  std::size_t resampled_splits = 0;                // splits redrawn for a single-class half
};

// Half/half random splits. Split k pairs position perm[k] of the training
// pool with the same position of the test pool, so the pools may come from
// different populations; with equal pools the halves are complementary.
// labels is indexed by family; both pools must have the same size.
ValidationResult monte_carlo_cv(std::span<const int> labels,
                                std::span<const ModelProcedure> models, std::size_t replicates,
                                std::uint64_t seed, std::span<const std::size_t> train_pool,
                                std::span<const std::size_t> test_pool, unsigned threads = 1);
ValidationResult monte_carlo_cv(std::span<const int> labels,
                                std::span<const ModelProcedure> models, std::size_t replicates,
                                std::uint64_t seed, unsigned threads = 1);

// Optimism-corrected bootstrap: apparent - mean_b(boot_b - test_b).
// Untrainable models report their apparent metrics. Returns one report per
// model.
ValidationResult bootstrap_validate(std::span<const int> labels,
                                    std::span<const ModelProcedure> models, std::size_t n_boot,
                                    std::uint64_t seed, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Aggregation

struct AggregateRow {
  std::string model;
  Metric metric = Metric::oe;
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double improvement_pct = MetricReport::kUndefined;  // NaN for the baseline itself
};

// units[u][model]: one report per unit (dataset or replicate). Means and
// percentile intervals are taken across units, ignoring undefined values.
std::vector<AggregateRow> aggregate(const std::vector<std::vector<MetricReport>>& units,
                                    std::span<const std::string> model_names,
                                    std::size_t baseline, OeRule rule = OeRule::log_ratio);

// Per-model average of scalar metrics over replicates, used to collapse a
// dataset's replicates into one unit.
std::vector<MetricReport> average_reports(const std::vector<std::vector<MetricReport>>& replicates);

}  // namespace mendelboost
