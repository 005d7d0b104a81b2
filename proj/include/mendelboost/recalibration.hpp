#pragma once

#include <span>
#include <vector>

namespace mendelboost {

// p' = sigmoid(slope * logit(p) + intercept).
struct PlattRecalibrator {
  double slope = 1.0;
  double intercept = 0.0;
};

// Predictions are clamped to [1e-7, 1 - 1e-7] before the logit.
PlattRecalibrator platt_fit(std::span<const double> predictions, std::span<const int> labels);
std::vector<double> platt_apply(const PlattRecalibrator& recal, std::span<const double> predictions);

// Nondecreasing step function. breakpoints are the distinct training
// predictions in increasing order; values[k] applies on [breakpoints[k],
// breakpoints[k + 1]).
struct IsotonicRecalibrator {
  std::vector<double> breakpoints;
  std::vector<double> values;
};

// Weighted pool-adjacent-violators on labels (or any targets) ordered by
// prediction. Tied predictions are pooled into one block first.
IsotonicRecalibrator isotonic_fit(std::span<const double> predictions,
                                  std::span<const double> targets);
IsotonicRecalibrator isotonic_fit(std::span<const double> predictions, std::span<const int> labels);
std::vector<double> isotonic_apply(const IsotonicRecalibrator& recal,
                                   std::span<const double> predictions);

// PAVA on an already ordered sequence; returns one fitted value per input.
std::vector<double> pava(std::span<const double> targets, std::span<const double> weights);

}  // namespace mendelboost
