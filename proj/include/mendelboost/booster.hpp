#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mendelboost/pedigree.hpp"

namespace mendelboost {

// ---------------------------------------------------------------------------
// Family-history features

struct CancerSite {
  std::string name;
  std::optional<Sex> sex;  // sex-specific cancers count only that sex
};

struct FeatureOptions {
  bool include_counselee = true;
};

// z_r = affected eligible members / eligible members, 0 when nobody is
// eligible or the cancer is not recorded in the pedigree.
std::vector<double> extract_features(const Pedigree& pedigree, std::span<const CancerSite> cancers,
                                     const FeatureOptions& options = {});

// Dense row-major matrix of per-family features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::vector<std::string> names);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  std::span<const double> row(std::size_t i) const { return {&data_[i * cols()], cols()}; }
  std::span<double> row(std::size_t i) { return {&data_[i * cols()], cols()}; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }

  void push_row(std::span<const double> values);
  // New matrix with the listed rows (repeats allowed) and columns.
  FeatureMatrix select(std::span<const std::size_t> rows,
                       std::span<const std::size_t> columns) const;
  std::size_t column(const std::string& name) const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Gradient-boosted regression trees on the logistic loss

struct BoostParams {
  int iterations = 50;
  int max_depth = 2;
  double shrinkage = 0.1;
  double bag_fraction = 0.5;
  double min_child_weight = 1.0;
  std::uint64_t seed = 0;

  void check() const;
  friend bool operator==(const BoostParams&, const BoostParams&) = default;
};

inline constexpr double kInitScoreBound = 15.0;

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;     // taken when value < threshold
  int right = -1;
  double weight = 0.0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(std::span<const double> x) const;
  int depth() const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

class BoostModel {
 public:
  BoostModel() = default;
  BoostModel(BoostParams params, std::vector<std::string> features,
             std::vector<RegressionTree> trees);

  const BoostParams& params() const { return params_; }
  const std::vector<std::string>& features() const { return features_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  // Additive log-odds correction nu * sum of leaf weights.
  double margin(std::span<const double> x) const;

  void save(std::ostream& out) const;
  static BoostModel load(std::istream& in);

  friend bool operator==(const BoostModel&, const BoostModel&) = default;

 private:
  BoostParams params_;
  std::vector<std::string> features_;
  std::vector<RegressionTree> trees_;
};

double sigmoid(double x);
double logit(double p);
// Logistic loss log(1 + exp(s)) - y s, summed.
double logistic_loss(std::span<const int> labels, std::span<const double> scores);

// Log-odds of the label mean, one value per label.
std::vector<double> default_init(std::span<const int> labels);

// Called with the training scores (log-odds) after every iteration.
using IterationObserver = std::function<void(int iteration, std::span<const double> scores)>;

BoostModel fit(const FeatureMatrix& features, std::span<const int> labels,
               std::span<const double> init_scores, const BoostParams& params,
               const IterationObserver& observer = {});

std::vector<double> predict(const BoostModel& model, const FeatureMatrix& features,
                            std::span<const double> init_scores);

}  // namespace mendelboost
