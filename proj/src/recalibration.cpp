#include "mendelboost/recalibration.hpp"

#include <algorithm>
#include <numeric>

#include "mendelboost/booster.hpp"
#include "mendelboost/error.hpp"
#include "mendelboost/logistic.hpp"

namespace mendelboost {

PlattRecalibrator platt_fit(std::span<const double> predictions, std::span<const int> labels) {
  std::vector<double> x(predictions.size());
  std::transform(predictions.begin(), predictions.end(), x.begin(),
                 [](double p) { return logit(clamp_probability(p)); });
  LogisticFit f = fit_logistic(x, labels);
  return {f.slope, f.intercept};
}

std::vector<double> platt_apply(const PlattRecalibrator& recal,
                                std::span<const double> predictions) {
  std::vector<double> out(predictions.size());
  std::transform(predictions.begin(), predictions.end(), out.begin(), [&](double p) {
    return sigmoid(recal.slope * logit(clamp_probability(p)) + recal.intercept);
  });
  return out;
}

std::vector<double> pava(std::span<const double> targets, std::span<const double> weights) {
  if (targets.size() != weights.size()) throw InvalidArgument("pava: length mismatch");
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> stack;
  stack.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(weights[i] > 0.0)) throw InvalidArgument("pava: weights must be positive");
    stack.push_back({targets[i], weights[i], 1});
    while (stack.size() > 1 && stack[stack.size() - 2].mean >= stack.back().mean) {
      Block top = stack.back();
      stack.pop_back();
      Block& below = stack.back();
      double w = below.weight + top.weight;
      below.mean = (below.mean * below.weight + top.mean * top.weight) / w;
      below.weight = w;
      below.count += top.count;
    }
  }
  std::vector<double> fitted;
  fitted.reserve(targets.size());
  for (const Block& b : stack) fitted.insert(fitted.end(), b.count, b.mean);
  return fitted;
}

IsotonicRecalibrator isotonic_fit(std::span<const double> predictions,
                                  std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw InvalidArgument("isotonic: length mismatch");
  if (predictions.empty()) throw InvalidArgument("isotonic: no data");
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return predictions[a] < predictions[b]; });

  IsotonicRecalibrator recal;
  std::vector<double> sums, weights;
  for (std::size_t i : order) {
    if (recal.breakpoints.empty() || predictions[i] != recal.breakpoints.back()) {
      recal.breakpoints.push_back(predictions[i]);
      sums.push_back(0.0);
      weights.push_back(0.0);
    }
    sums.back() += targets[i];
    weights.back() += 1.0;
  }
  std::vector<double> means(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k) means[k] = sums[k] / weights[k];
  recal.values = pava(means, weights);
  return recal;
}

IsotonicRecalibrator isotonic_fit(std::span<const double> predictions,
                                  std::span<const int> labels) {
  std::vector<double> targets(labels.begin(), labels.end());
  return isotonic_fit(predictions, targets);
}

std::vector<double> isotonic_apply(const IsotonicRecalibrator& recal,
                                   std::span<const double> predictions) {
  if (recal.breakpoints.empty()) throw InvalidArgument("isotonic: recalibrator is empty");
  std::vector<double> out(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto it = std::upper_bound(recal.breakpoints.begin(), recal.breakpoints.end(), predictions[i]);
    std::size_t k = it == recal.breakpoints.begin()
                        ? 0
                        : static_cast<std::size_t>(it - recal.breakpoints.begin()) - 1;
    out[i] = recal.values[k];
  }
  return out;
}

}  // namespace mendelboost
