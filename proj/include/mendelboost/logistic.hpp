#pragma once

#include <span>

namespace mendelboost {

inline constexpr double kProbabilityFloor = 1e-7;

double clamp_probability(double p);

struct LogisticFit {
  double intercept = 0.0;
  double slope = 1.0;
  int iterations = 0;
};

struct NewtonOptions {
  double gradient_tolerance = 1e-10;
  int max_iterations = 100;
};

// Maximum-likelihood fit of P(y = 1) = sigmoid(intercept + slope * x).
// Throws InvalidArgument for a constant x or single-class y and
// ConvergenceError when the gradient does not vanish (e.g. separation).
LogisticFit fit_logistic(std::span<const double> x, std::span<const int> y,
                         const NewtonOptions& options = {});

// Fit of P(y = 1) = sigmoid(intercept + offset) with the slope fixed at 1.
LogisticFit fit_logistic_offset(std::span<const double> offset, std::span<const int> y,
                                const NewtonOptions& options = {});

}  // namespace mendelboost
