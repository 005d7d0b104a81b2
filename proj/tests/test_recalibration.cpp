#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mendelboost/booster.hpp"
#include "mendelboost/error.hpp"
#include "mendelboost/evaluation.hpp"
#include "mendelboost/recalibration.hpp"
#include "mendelboost/rng.hpp"

namespace mendelboost {
namespace {

// Predictions from a deliberately miscalibrated model and labels drawn from
// the true risk.
struct Sample {
  std::vector<double> p;
  std::vector<int> y;
};

Sample miscalibrated(Rng& rng, std::size_t n, double slope, double shift) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> eta(-1.5, 1.2);
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    double e = eta(rng);
    s.y.push_back(u(rng) < sigmoid(e) ? 1 : 0);
    s.p.push_back(sigmoid(slope * e + shift));
  }
  return s;
}

// Weighted isotonic regression by the min-max formula:
// m_i = max_{j <= i} min_{k >= i} mean(y[j..k]).
std::vector<double> minmax_isotonic(const std::vector<double>& y, const std::vector<double>& w) {
  const std::size_t n = y.size();
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = -INFINITY;
    for (std::size_t j = 0; j <= i; ++j) {
      double worst = INFINITY;
      for (std::size_t k = i; k < n; ++k) {
        double sy = 0.0, sw = 0.0;
        for (std::size_t t = j; t <= k; ++t) {
          sy += w[t] * y[t];
          sw += w[t];
        }
        worst = std::min(worst, sy / sw);
      }
      best = std::max(best, worst);
    }
    m[i] = best;
  }
  return m;
}

double weighted_sse(const std::vector<double>& y, const std::vector<double>& w,
                    const std::vector<double>& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * (y[i] - m[i]) * (y[i] - m[i]);
  return s;
}

// Best nondecreasing fit with values on the grid {0, 1/step, ..., 1}, by
// dynamic programming over (position, last value).
double grid_minimum(const std::vector<double>& y, const std::vector<double>& w, int steps) {
  std::vector<double> cost(static_cast<std::size_t>(steps) + 1, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    double running = INFINITY;
    for (int v = 0; v <= steps; ++v) {
      running = std::min(running, cost[static_cast<std::size_t>(v)]);
      double m = static_cast<double>(v) / steps;
      cost[static_cast<std::size_t>(v)] = running + w[i] * (y[i] - m) * (y[i] - m);
    }
  }
  return *std::min_element(cost.begin(), cost.end());
}

TEST(Platt, TrainingObservedOverExpectedIsOne) {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    Sample s = miscalibrated(rng, 3000, 0.6, -0.8);
    PlattRecalibrator r = platt_fit(s.p, s.y);
    auto q = platt_apply(r, s.p);
    EXPECT_NEAR(oe(s.y, q), 1.0, 1e-8);
    EXPECT_NEAR(calibration_intercept_slope(s.y, q).slope, 1.0, 1e-6);
    EXPECT_EQ(auc(s.y, q), auc(s.y, s.p));
  }
}

TEST(Platt, RecoversIdentityUnderTheNull) {
  Rng rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p;
  std::vector<int> y;
  for (int i = 0; i < 10000; ++i) {
    p.push_back(0.02 + 0.96 * u(rng));
    y.push_back(u(rng) < p.back() ? 1 : 0);
  }
  PlattRecalibrator r = platt_fit(p, y);
  EXPECT_NEAR(r.slope, 1.0, 0.05);
  EXPECT_NEAR(r.intercept, 0.0, 0.05);
}

TEST(Platt, TwoPointFitReproducesGroupRates) {
  // With two distinct predictions the MLE matches each group's event rate.
  std::vector<double> p;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    p.push_back(0.2);
    y.push_back(i < 3 ? 1 : 0);
  }
  for (int i = 0; i < 8; ++i) {
    p.push_back(0.6);
    y.push_back(i < 6 ? 1 : 0);
  }
  PlattRecalibrator r = platt_fit(p, y);
  double x1 = std::log(0.2 / 0.8), x2 = std::log(0.6 / 0.4);
  double slope = (std::log(0.75 / 0.25) - std::log(0.3 / 0.7)) / (x2 - x1);
  EXPECT_NEAR(r.slope, slope, 1e-9);
  EXPECT_NEAR(r.intercept, std::log(0.3 / 0.7) - slope * x1, 1e-9);
  auto q = platt_apply(r, std::vector<double>{0.2, 0.6});
  EXPECT_NEAR(q[0], 0.3, 1e-10);
  EXPECT_NEAR(q[1], 0.75, 1e-10);
}

TEST(Platt, ApplyIdentities) {
  std::vector<double> p = {0.01, 0.2, 0.5, 0.9};
  auto same = platt_apply(PlattRecalibrator{1.0, 0.0}, p);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(same[i], p[i], 1e-15);
  auto doubled = platt_apply(PlattRecalibrator{1.0, std::log(2.0)}, p);
  for (std::size_t i = 0; i < p.size(); ++i)
    EXPECT_NEAR(doubled[i] / (1.0 - doubled[i]), 2.0 * p[i] / (1.0 - p[i]), 1e-12);
}

TEST(Platt, RejectsDegenerateInput) {
  std::vector<double> p = {0.2, 0.3, 0.4};
  EXPECT_THROW(platt_fit(p, std::vector<int>{1, 1, 1}), InvalidArgument);
  EXPECT_THROW(platt_fit(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{0, 1, 0}),
               InvalidArgument);
  // Perfect separation has no finite maximizer.
  EXPECT_THROW(platt_fit(p, std::vector<int>{0, 1, 1}), ConvergenceError);
}

TEST(Isotonic, PoolsViolators) {
  std::vector<double> y = {3, 1, 2};
  std::vector<double> w = {1, 1, 1};
  EXPECT_EQ(pava(y, w), (std::vector<double>{2, 2, 2}));
  std::vector<double> sorted = {0, 0.5, 0.5, 1};
  std::vector<double> w4(4, 1.0);
  EXPECT_EQ(pava(sorted, w4), sorted);
}

TEST(Isotonic, MatchesMinMaxFormulaAndGridSearch) {
  Rng rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 8);
  for (int rep = 0; rep < 300; ++rep) {
    std::size_t n = static_cast<std::size_t>(len(rng));
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = u(rng) < 0.5 ? std::round(u(rng)) : u(rng);
      w[i] = 0.5 + u(rng);
    }
    auto fitted = pava(y, w);
    auto oracle = minmax_isotonic(y, w);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(fitted[i], oracle[i], 1e-12);
    // No monotone sequence on a fine grid does better.
    EXPECT_LE(weighted_sse(y, w, fitted), grid_minimum(y, w, 400) + 1e-12);
  }
}

TEST(Isotonic, TiedPredictionsPoolFirst) {
  std::vector<double> p = {0.1, 0.5, 0.5, 0.5, 0.9};
  std::vector<int> y = {0, 1, 0, 1, 1};
  IsotonicRecalibrator r = isotonic_fit(p, y);
  EXPECT_EQ(r.breakpoints, (std::vector<double>{0.1, 0.5, 0.9}));
  EXPECT_EQ(r.values.size(), 3u);
  EXPECT_DOUBLE_EQ(r.values[1], 2.0 / 3.0);
  auto q = isotonic_apply(r, p);
  EXPECT_EQ(q[1], q[2]);
  EXPECT_EQ(q[2], q[3]);
}

TEST(Isotonic, ApplyIsRightContinuousStepWithClamping) {
  IsotonicRecalibrator r{{0.2, 0.4, 0.6}, {0.1, 0.3, 0.8}};
  auto q = isotonic_apply(r, std::vector<double>{0.0, 0.2, 0.3, 0.4, 0.59, 0.6, 0.99});
  EXPECT_EQ(q, (std::vector<double>{0.1, 0.1, 0.1, 0.3, 0.3, 0.8, 0.8}));
}

TEST(Isotonic, FitPropertiesOnSimulatedScores) {
  Rng rng(14);
  Sample s = miscalibrated(rng, 2000, 0.5, 0.4);
  IsotonicRecalibrator r = isotonic_fit(s.p, s.y);
  EXPECT_TRUE(std::is_sorted(r.breakpoints.begin(), r.breakpoints.end()));
  EXPECT_TRUE(std::is_sorted(r.values.begin(), r.values.end()));
  for (double v : r.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  auto q = isotonic_apply(r, s.p);
  // Block means reproduce the event count.
  EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0),
              std::accumulate(s.y.begin(), s.y.end(), 0.0), 1e-8);
  double mean = std::accumulate(s.y.begin(), s.y.end(), 0.0) / static_cast<double>(s.y.size());
  double sse = 0.0, sse_const = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    sse += (s.y[i] - q[i]) * (s.y[i] - q[i]);
    sse_const += (s.y[i] - mean) * (s.y[i] - mean);
  }
  EXPECT_LE(sse, sse_const);

  // Refitting on its own fitted values changes nothing.
  IsotonicRecalibrator again = isotonic_fit(std::span<const double>(s.p), std::span<const double>(q));
  auto q2 = isotonic_apply(again, s.p);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(q2[i], q[i], 1e-15) << i;

  std::vector<double> grid(101);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i) / 100.0;
  auto g = isotonic_apply(r, grid);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
}

}  // namespace
}  // namespace mendelboost
