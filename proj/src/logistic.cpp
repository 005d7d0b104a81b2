#include "mendelboost/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mendelboost/booster.hpp"
#include "mendelboost/error.hpp"

namespace mendelboost {

double clamp_probability(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

namespace {

void check_inputs(std::span<const double> x, std::span<const int> y) {
  if (x.size() != y.size()) throw InvalidArgument("logistic fit: length mismatch");
  std::size_t positives = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw InvalidArgument("logistic fit: labels must be 0 or 1");
    positives += static_cast<std::size_t>(v);
  }
  if (positives == 0 || positives == y.size())
    throw InvalidArgument("logistic fit: labels need both classes");
}

double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

// Negative log-likelihood for linear predictor a + b x + offset.
struct Objective {
  std::span<const double> x;
  std::span<const double> offset;
  std::span<const int> y;

  double eta(std::size_t i, double a, double b) const {
    double e = a;
    if (!x.empty()) e += b * x[i];
    if (!offset.empty()) e += offset[i];
    return e;
  }

  double loss(double a, double b) const {
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double e = eta(i, a, b);
      l += softplus(e) - y[i] * e;
    }
    return l;
  }
};

// Rounding noise near the optimum must not trigger step halving.
bool worse(double next, double current) {
  return !(next <= current + 1e-12 * (1.0 + std::abs(current)));
}

// In one dimension the likelihood has no finite maximizer exactly when the
// classes are (quasi-)separated by a threshold on x.
bool separated(std::span<const double> x, std::span<const int> y) {
  double lo0 = INFINITY, hi0 = -INFINITY, lo1 = INFINITY, hi1 = -INFINITY;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i]) {
      lo1 = std::min(lo1, x[i]);
      hi1 = std::max(hi1, x[i]);
    } else {
      lo0 = std::min(lo0, x[i]);
      hi0 = std::max(hi0, x[i]);
    }
  }
  return hi0 <= lo1 || hi1 <= lo0;
}

[[noreturn]] void not_converged(int iterations) {
  throw ConvergenceError("logistic fit did not converge in " + std::to_string(iterations) +
                         " iterations");
}

}  // namespace

LogisticFit fit_logistic(std::span<const double> x, std::span<const int> y,
                         const NewtonOptions& options) {
  check_inputs(x, y);
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) throw InvalidArgument("logistic fit: predictor is constant");
  if (separated(x, y)) throw ConvergenceError("logistic fit: classes are separated by the predictor");

  Objective obj{x, {}, y};
  double a = 0.0, b = 0.0;
  double current = obj.loss(a, b);
  for (int it = 0; it < options.max_iterations; ++it) {
    double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double p = sigmoid(obj.eta(i, a, b));
      double r = p - y[i];
      double w = p * (1.0 - p);
      ga += r;
      gb += r * x[i];
      haa += w;
      hab += w * x[i];
      hbb += w * x[i] * x[i];
    }
    if (std::hypot(ga, gb) < options.gradient_tolerance) return {a, b, it};
    double det = haa * hbb - hab * hab;
    if (!(det > 0.0) || !std::isfinite(det)) not_converged(it);
    double da = -(hbb * ga - hab * gb) / det;
    double db = -(haa * gb - hab * ga) / det;
    double step = 1.0;
    double next = obj.loss(a + da, b + db);
    while (worse(next, current) && step > 1e-12) {
      step *= 0.5;
      next = obj.loss(a + step * da, b + step * db);
    }
    a += step * da;
    b += step * db;
    current = next;
  }
  not_converged(options.max_iterations);
}

LogisticFit fit_logistic_offset(std::span<const double> offset, std::span<const int> y,
                                const NewtonOptions& options) {
  check_inputs(offset, y);
  Objective obj{{}, offset, y};
  double a = 0.0;
  double current = obj.loss(a, 0.0);
  for (int it = 0; it < options.max_iterations; ++it) {
    double g = 0.0, h = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double p = sigmoid(obj.eta(i, a, 0.0));
      g += p - y[i];
      h += p * (1.0 - p);
    }
    if (std::abs(g) < options.gradient_tolerance) return {a, 1.0, it};
    if (!(h > 0.0)) not_converged(it);
    double da = -g / h;
    double step = 1.0;
    double next = obj.loss(a + da, 0.0);
    while (worse(next, current) && step > 1e-12) {
      step *= 0.5;
      next = obj.loss(a + step * da, 0.0);
    }
    a += step * da;
    current = next;
  }
  not_converged(options.max_iterations);
}

}  // namespace mendelboost
