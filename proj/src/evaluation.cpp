#include "mendelboost/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mendelboost/booster.hpp"
#include "mendelboost/error.hpp"
#include "mendelboost/logistic.hpp"
#include "mendelboost/parallel.hpp"
#include "mendelboost/rng.hpp"

namespace mendelboost {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::oe: return "oe";
    case Metric::auc: return "auc";
    case Metric::rbs: return "rbs";
    case Metric::cal_intercept: return "cal_intercept";
    case Metric::cal_slope: return "cal_slope";
  }
  return "?";
}

namespace {

void check_lengths(std::span<const int> labels, std::span<const double> predictions) {
  if (labels.size() != predictions.size())
    throw InvalidArgument("labels and predictions differ in length");
  if (labels.empty()) throw InvalidArgument("no predictions to evaluate");
}

bool has_both_classes(std::span<const int> labels) {
  bool zero = false, one = false;
  for (int y : labels) (y ? one : zero) = true;
  return zero && one;
}

}  // namespace

double oe(std::span<const int> labels, std::span<const double> predictions) {
  check_lengths(labels, predictions);
  double observed = std::accumulate(labels.begin(), labels.end(), 0.0);
  double expected = std::accumulate(predictions.begin(), predictions.end(), 0.0);
  if (!(expected > 0.0)) throw InvalidArgument("O/E: expected count is zero");
  return observed / expected;
}

double auc(std::span<const int> labels, std::span<const double> predictions) {
  check_lengths(labels, predictions);
  if (!has_both_classes(labels)) throw InvalidArgument("AUC needs both classes");
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return predictions[a] < predictions[b]; });
  // Doubled midranks keep tied groups exact in integers.
  std::uint64_t positives = 0;
  std::uint64_t doubled_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && predictions[order[j]] == predictions[order[i]]) ++j;
    std::uint64_t doubled_rank = i + j + 1;  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        ++positives;
        doubled_rank_sum += doubled_rank;
      }
    }
    i = j;
  }
  std::uint64_t negatives = n - positives;
  // U = rank_sum - P(P+1)/2, in doubled units.
  double doubled_u = static_cast<double>(doubled_rank_sum - positives * (positives + 1));
  return doubled_u / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double rbs(std::span<const int> labels, std::span<const double> predictions) {
  check_lengths(labels, predictions);
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double d = labels[i] - predictions[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(labels.size()));
}

CalibrationFit calibration_intercept_slope(std::span<const int> labels,
                                           std::span<const double> predictions) {
  check_lengths(labels, predictions);
  std::vector<double> x(predictions.size());
  std::transform(predictions.begin(), predictions.end(), x.begin(),
                 [](double p) { return logit(clamp_probability(p)); });
  CalibrationFit fit;
  fit.intercept = fit_logistic_offset(x, labels).intercept;
  fit.slope = fit_logistic(x, labels).slope;
  return fit;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) throw InvalidArgument("Wilson interval needs n > 0");
  double nn = static_cast<double>(n);
  double p = static_cast<double>(successes) / nn;
  double z2 = z * z;
  double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  double half = z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty data");
  double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> percentile_interval(std::span<const double> values, double lo,
                                              double hi) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {quantile(sorted, lo), quantile(sorted, hi)};
}

std::vector<DecileBin> decile_table(std::span<const int> labels,
                                    std::span<const double> predictions, int bins) {
  check_lengths(labels, predictions);
  if (bins < 1) throw InvalidArgument("decile table needs at least one bin");
  std::vector<double> sorted(predictions.begin(), predictions.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) edges.push_back(quantile(sorted, static_cast<double>(k) / bins));
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<double> pred_sum(edges.size() + 1, 0.0);
  std::vector<std::size_t> events(edges.size() + 1, 0), counts(edges.size() + 1, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto b = static_cast<std::size_t>(
        std::lower_bound(edges.begin(), edges.end(), predictions[i]) - edges.begin());
    pred_sum[b] += predictions[i];
    events[b] += static_cast<std::size_t>(labels[i]);
    ++counts[b];
  }
  std::vector<DecileBin> table;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (counts[b] == 0) continue;
    DecileBin bin;
    bin.n = counts[b];
    bin.mean_prediction = pred_sum[b] / static_cast<double>(counts[b]);
    bin.observed_fraction = static_cast<double>(events[b]) / static_cast<double>(counts[b]);
    std::tie(bin.ci_lo, bin.ci_hi) = wilson_interval(events[b], counts[b]);
    table.push_back(bin);
  }
  return table;
}

double MetricReport::get(Metric metric) const {
  switch (metric) {
    case Metric::oe: return oe;
    case Metric::auc: return auc;
    case Metric::rbs: return rbs;
    case Metric::cal_intercept: return cal_intercept;
    case Metric::cal_slope: return cal_slope;
  }
  return kUndefined;
}

double& MetricReport::get(Metric metric) {
  switch (metric) {
    case Metric::oe: return oe;
    case Metric::auc: return auc;
    case Metric::rbs: return rbs;
    case Metric::cal_intercept: return cal_intercept;
    case Metric::cal_slope: break;
  }
  return cal_slope;
}

MetricReport evaluate_predictions(std::span<const int> labels,
                                  std::span<const double> predictions) {
  check_lengths(labels, predictions);
  MetricReport r;
  double expected = std::accumulate(predictions.begin(), predictions.end(), 0.0);
  if (expected > 0.0) r.oe = oe(labels, predictions);
  r.rbs = rbs(labels, predictions);
  if (has_both_classes(labels)) {
    r.auc = auc(labels, predictions);
    try {
      CalibrationFit fit = calibration_intercept_slope(labels, predictions);
      r.cal_intercept = fit.intercept;
      r.cal_slope = fit.slope;
    } catch (const Error&) {
      // Constant predictions or separation: weak calibration is undefined.
    }
  }
  r.deciles = decile_table(labels, predictions);
  return r;
}

bool better(Metric metric, double candidate, double baseline, OeRule rule) {
  if (std::isnan(candidate) || std::isnan(baseline)) return false;
  switch (metric) {
    case Metric::oe:
      if (rule == OeRule::log_ratio)
        return std::abs(std::log(candidate)) < std::abs(std::log(baseline));
      return std::abs(candidate - 1.0) < std::abs(baseline - 1.0);
    case Metric::auc: return candidate > baseline;
    case Metric::rbs: return candidate < baseline;
    case Metric::cal_intercept: return std::abs(candidate) < std::abs(baseline);
    case Metric::cal_slope: return std::abs(candidate - 1.0) < std::abs(baseline - 1.0);
  }
  return false;
}

double improvement_percentage(Metric metric, std::span<const double> candidate,
                              std::span<const double> baseline, OeRule rule) {
  if (candidate.size() != baseline.size())
    throw InvalidArgument("improvement percentage: unit counts differ");
  if (candidate.empty()) return MetricReport::kUndefined;
  std::size_t wins = 0;
  for (std::size_t i = 0; i < candidate.size(); ++i)
    if (better(metric, candidate[i], baseline[i], rule)) ++wins;
  return 100.0 * static_cast<double>(wins) / static_cast<double>(candidate.size());
}

namespace {

std::vector<int> gather(std::span<const int> labels, std::span<const std::size_t> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
  return out;
}

MetricReport run_model(const ModelProcedure& model, std::span<const int> labels,
                       std::span<const std::size_t> train, std::span<const std::size_t> test,
                       std::uint64_t seed) {
  std::vector<double> pred = model.fit_predict(train, test, seed);
  if (pred.size() != test.size())
    throw Error("model " + model.name + " returned " + std::to_string(pred.size()) +
                " predictions for " + std::to_string(test.size()) + " families");
  return evaluate_predictions(gather(labels, test), pred);
}

constexpr int kMaxSplitAttempts = 1000;

}  // namespace

ValidationResult monte_carlo_cv(std::span<const int> labels,
                                std::span<const ModelProcedure> models, std::size_t replicates,
                                std::uint64_t seed, std::span<const std::size_t> train_pool,
                                std::span<const std::size_t> test_pool, unsigned threads) {
  if (train_pool.size() != test_pool.size())
    throw InvalidArgument("train and test pools differ in size");
  const std::size_t n = train_pool.size();
  if (n < 2) throw InvalidArgument("cross-validation needs at least two families");
  for (auto i : train_pool)
    if (i >= labels.size()) throw InvalidArgument("pool index out of range");
  for (auto i : test_pool)
    if (i >= labels.size()) throw InvalidArgument("pool index out of range");

  ValidationResult result;
  result.reports.resize(replicates);
  std::vector<std::size_t> resamples(replicates, 0);
  parallel_for(replicates, threads, [&](std::size_t r) {
    std::vector<std::size_t> train, test;
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxSplitAttempts)
        throw Error("replicate " + std::to_string(r) + ": no split with both classes");
      Rng rng = make_rng(seed, {r, static_cast<std::uint64_t>(attempt)});
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      train.clear();
      test.clear();
      for (std::size_t k = 0; k < n / 2; ++k) train.push_back(train_pool[perm[k]]);
      for (std::size_t k = n / 2; k < n; ++k) test.push_back(test_pool[perm[k]]);
      if (has_both_classes(gather(labels, train)) && has_both_classes(gather(labels, test))) break;
      ++resamples[r];
    }
    std::uint64_t model_seed = stream_seed(seed, {r, ~std::uint64_t{0}});
    auto& row = result.reports[r];
    row.reserve(models.size());
    for (const auto& model : models) {
      try {
        row.push_back(run_model(model, labels, train, test, model_seed));
      } catch (const Error& e) {
        throw Error("replicate " + std::to_string(r) + ", model " + model.name + ": " + e.what());
      }
    }
  });
  result.resampled_splits = std::accumulate(resamples.begin(), resamples.end(), std::size_t{0});
  return result;
}

ValidationResult monte_carlo_cv(std::span<const int> labels,
                                std::span<const ModelProcedure> models, std::size_t replicates,
                                std::uint64_t seed, unsigned threads) {
  std::vector<std::size_t> pool(labels.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  return monte_carlo_cv(labels, models, replicates, seed, pool, pool, threads);
}

ValidationResult bootstrap_validate(std::span<const int> labels,
                                    std::span<const ModelProcedure> models, std::size_t n_boot,
                                    std::uint64_t seed, unsigned threads) {
  const std::size_t n = labels.size();
  if (n == 0) throw InvalidArgument("bootstrap needs data");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});

  ValidationResult result;
  std::vector<MetricReport> apparent;
  for (const auto& model : models)
    apparent.push_back(run_model(model, labels, all, all, stream_seed(seed, {~std::uint64_t{0}})));

  // optimism[b][m]: boot_b - test_b per metric.
  std::vector<std::vector<MetricReport>> optimism(n_boot);
  std::vector<std::size_t> resamples(n_boot, 0);
  parallel_for(n_boot, threads, [&](std::size_t b) {
    std::vector<std::size_t> sample(n);
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxSplitAttempts)
        throw Error("bootstrap " + std::to_string(b) + ": no resample with both classes");
      Rng rng = make_rng(seed, {b, static_cast<std::uint64_t>(attempt)});
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& s : sample) s = pick(rng);
      if (has_both_classes(gather(labels, sample))) break;
      ++resamples[b];
    }
    // One fit serves both evaluations: predict the resample, then everyone.
    std::vector<std::size_t> targets(sample);
    targets.insert(targets.end(), all.begin(), all.end());
    std::uint64_t model_seed = stream_seed(seed, {b, ~std::uint64_t{0}});
    for (const auto& model : models) {
      MetricReport diff;
      if (model.trainable) {
        std::vector<double> pred = model.fit_predict(sample, targets, model_seed);
        if (pred.size() != targets.size()) throw Error("model " + model.name + ": bad output size");
        std::span<const double> p(pred);
        MetricReport boot = evaluate_predictions(gather(labels, sample), p.first(n));
        MetricReport test = evaluate_predictions(labels, p.subspan(n));
        for (Metric m : kMetrics) diff.get(m) = boot.get(m) - test.get(m);
      } else {
        for (Metric m : kMetrics) diff.get(m) = 0.0;
      }
      optimism[b].push_back(std::move(diff));
    }
  });

  std::vector<MetricReport> corrected = apparent;
  if (n_boot > 0) {
    for (std::size_t m = 0; m < models.size(); ++m) {
      for (Metric metric : kMetrics) {
        double sum = 0.0;
        for (std::size_t b = 0; b < n_boot; ++b) sum += optimism[b][m].get(metric);
        corrected[m].get(metric) -= sum / static_cast<double>(n_boot);
      }
    }
  }
  result.reports.push_back(std::move(corrected));
  result.resampled_splits = std::accumulate(resamples.begin(), resamples.end(), std::size_t{0});
  return result;
}

std::vector<MetricReport> average_reports(
    const std::vector<std::vector<MetricReport>>& replicates) {
  if (replicates.empty()) return {};
  const std::size_t n_models = replicates.front().size();
  std::vector<MetricReport> out(n_models);
  for (std::size_t m = 0; m < n_models; ++m) {
    for (Metric metric : kMetrics) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& row : replicates) {
        double v = row.at(m).get(metric);
        if (std::isnan(v)) continue;
        sum += v;
        ++count;
      }
      out[m].get(metric) = count ? sum / static_cast<double>(count) : MetricReport::kUndefined;
    }
  }
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<std::vector<MetricReport>>& units,
                                    std::span<const std::string> model_names,
                                    std::size_t baseline, OeRule rule) {
  std::vector<AggregateRow> rows;
  if (units.empty()) return rows;
  const std::size_t n_models = model_names.size();
  for (const auto& u : units)
    if (u.size() != n_models) throw InvalidArgument("aggregate: model count mismatch");
  if (baseline >= n_models) throw InvalidArgument("aggregate: baseline out of range");

  for (std::size_t m = 0; m < n_models; ++m) {
    for (Metric metric : kMetrics) {
      std::vector<double> values, candidate, reference;
      for (const auto& u : units) {
        double v = u[m].get(metric);
        candidate.push_back(v);
        reference.push_back(u[baseline].get(metric));
        if (!std::isnan(v)) values.push_back(v);
      }
      AggregateRow row;
      row.model = model_names[m];
      row.metric = metric;
      if (values.empty()) {
        row.mean = row.ci_lo = row.ci_hi = MetricReport::kUndefined;
      } else {
        row.mean = std::accumulate(values.begin(), values.end(), 0.0) /
                   static_cast<double>(values.size());
        std::tie(row.ci_lo, row.ci_hi) = percentile_interval(values);
      }
      if (m != baseline) row.improvement_pct = improvement_percentage(metric, candidate, reference, rule);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace mendelboost
