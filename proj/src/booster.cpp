#include "mendelboost/booster.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "mendelboost/error.hpp"
#include "mendelboost/rng.hpp"

namespace mendelboost {

std::vector<double> extract_features(const Pedigree& pedigree, std::span<const CancerSite> cancers,
                                     const FeatureOptions& options) {
  std::vector<double> z(cancers.size(), 0.0);
  const auto& members = pedigree.members();
  const std::string& counselee = pedigree.counselee_id();
  for (std::size_t r = 0; r < cancers.size(); ++r) {
    auto column = pedigree.cancer_index(cancers[r].name);
    if (!column) continue;
    std::size_t eligible = 0;
    std::size_t affected = 0;
    for (const Individual& ind : members) {
      if (!options.include_counselee && ind.id == counselee) continue;
      if (cancers[r].sex && ind.sex != *cancers[r].sex) continue;
      ++eligible;
      if (ind.phenotypes[*column].affected) ++affected;
    }
    if (eligible > 0) z[r] = static_cast<double>(affected) / static_cast<double>(eligible);
  }
  return z;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::vector<std::string> names)
    : rows_(rows), names_(std::move(names)), data_(rows * names_.size(), 0.0) {}

void FeatureMatrix::push_row(std::span<const double> values) {
  if (values.size() != cols())
    throw InvalidArgument("feature row has " + std::to_string(values.size()) + " values, expected " +
                          std::to_string(cols()));
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> rows,
                                    std::span<const std::size_t> columns) const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (std::size_t c : columns) names.push_back(names_.at(c));
  FeatureMatrix out(rows.size(), std::move(names));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= rows_) throw InvalidArgument("feature row index out of range");
    for (std::size_t j = 0; j < columns.size(); ++j) out(i, j) = (*this)(rows[i], columns[j]);
  }
  return out;
}

std::size_t FeatureMatrix::column(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw InvalidArgument("unknown feature " + name);
  return static_cast<std::size_t>(it - names_.begin());
}

void BoostParams::check() const {
  if (iterations < 0) throw InvalidArgument("iterations must be >= 0");
  if (max_depth < 1) throw InvalidArgument("max_depth must be >= 1");
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) throw InvalidArgument("shrinkage must be in [0, 1]");
  if (!(bag_fraction > 0.0 && bag_fraction <= 1.0))
    throw InvalidArgument("bag_fraction must be in (0, 1]");
  if (!(min_child_weight >= 0.0)) throw InvalidArgument("min_child_weight must be >= 0");
}

double RegressionTree::evaluate(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  std::size_t i = 0;
  while (!nodes[i].is_leaf())
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] < nodes[i].threshold
                                     ? nodes[i].left
                                     : nodes[i].right);
  return nodes[i].weight;
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

BoostModel::BoostModel(BoostParams params, std::vector<std::string> features,
                       std::vector<RegressionTree> trees)
    : params_(params), features_(std::move(features)), trees_(std::move(trees)) {}

double BoostModel::margin(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.evaluate(x);
  return params_.shrinkage * sum;
}

namespace {

constexpr const char* kModelMagic = "mendelboost-model";
constexpr int kModelVersion = 1;

template <typename T>
T read_field(std::istream& in, const std::string& key) {
  std::string word;
  if (!(in >> word) || word != key) throw ParseError("model file: expected '" + key + "'");
  T value{};
  if (!(in >> value)) throw ParseError("model file: bad value for '" + key + "'");
  return value;
}

}  // namespace

void BoostModel::save(std::ostream& out) const {
  std::ostringstream os;
  os.precision(17);
  os << kModelMagic << ' ' << kModelVersion << '\n';
  os << "iterations " << params_.iterations << '\n'
     << "max_depth " << params_.max_depth << '\n'
     << "shrinkage " << params_.shrinkage << '\n'
     << "bag_fraction " << params_.bag_fraction << '\n'
     << "min_child_weight " << params_.min_child_weight << '\n'
     << "seed " << params_.seed << '\n';
  os << "features " << features_.size();
  for (const auto& f : features_) os << ' ' << f;
  os << '\n' << "trees " << trees_.size() << '\n';
  for (const auto& tree : trees_) {
    os << "nodes " << tree.nodes.size() << '\n';
    for (const auto& n : tree.nodes)
      os << n.feature << ' ' << n.threshold << ' ' << n.left << ' ' << n.right << ' ' << n.weight
         << '\n';
  }
  os << "end\n";
  out << os.str();
  if (!out) throw Error("failed to write model");
}

BoostModel BoostModel::load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic)
    throw ParseError("not a mendelboost model file");
  if (version != kModelVersion)
    throw ParseError("unsupported model version " + std::to_string(version));
  BoostParams params;
  params.iterations = read_field<int>(in, "iterations");
  params.max_depth = read_field<int>(in, "max_depth");
  params.shrinkage = read_field<double>(in, "shrinkage");
  params.bag_fraction = read_field<double>(in, "bag_fraction");
  params.min_child_weight = read_field<double>(in, "min_child_weight");
  params.seed = read_field<std::uint64_t>(in, "seed");
  params.check();

  auto n_features = read_field<std::size_t>(in, "features");
  std::vector<std::string> features(n_features);
  for (auto& f : features)
    if (!(in >> f)) throw ParseError("model file: truncated feature list");

  auto n_trees = read_field<std::size_t>(in, "trees");
  std::vector<RegressionTree> trees(n_trees);
  for (auto& tree : trees) {
    auto n_nodes = read_field<std::size_t>(in, "nodes");
    tree.nodes.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      TreeNode& n = tree.nodes[i];
      if (!(in >> n.feature >> n.threshold >> n.left >> n.right >> n.weight))
        throw ParseError("model file: truncated tree");
      if (!n.is_leaf()) {
        auto valid_child = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n_nodes); };
        if (static_cast<std::size_t>(n.feature) >= n_features || !valid_child(n.left) ||
            !valid_child(n.right))
          throw ParseError("model file: malformed tree node");
      }
    }
  }
  std::string end;
  if (!(in >> end) || end != "end") throw ParseError("model file: missing end marker");
  return BoostModel(params, std::move(features), std::move(trees));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double logistic_loss(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw InvalidArgument("labels and scores differ in length");
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double s = scores[i];
    double softplus = s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    loss += softplus - labels[i] * s;
  }
  return loss;
}

std::vector<double> default_init(std::span<const int> labels) {
  if (labels.empty()) throw InvalidArgument("default_init needs labels");
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size())
    throw InvalidArgument("default_init needs both classes");
  double mean = static_cast<double>(positives) / static_cast<double>(labels.size());
  return std::vector<double>(labels.size(), std::log(mean / (1.0 - mean)));
}

namespace {

double clamp_init(double s) { return std::clamp(s, -kInitScoreBound, kInitScoreBound); }

struct GradPair {
  double g;
  double h;
};

class TreeGrower {
 public:
  TreeGrower(const FeatureMatrix& x, std::span<const GradPair> grad, const BoostParams& params)
      : x_(x), grad_(grad), params_(params) {}

  RegressionTree grow(std::vector<std::size_t> samples) {
    RegressionTree tree;
    build(tree, std::move(samples), 0);
    return tree;
  }

 private:
  struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  // Sums in a canonical order so that totals do not depend on sample order.
  std::pair<double, double> totals(std::vector<std::size_t>& samples) const {
    std::sort(samples.begin(), samples.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(grad_[a].g, grad_[a].h) < std::tie(grad_[b].g, grad_[b].h);
    });
    double g = 0.0, h = 0.0;
    for (std::size_t i : samples) {
      g += grad_[i].g;
      h += grad_[i].h;
    }
    return {g, h};
  }

  bool child_ok(double h) const { return h > 0.0 && h >= params_.min_child_weight; }

  Split best_split(std::vector<std::size_t>& samples) const {
    Split best;
    for (std::size_t j = 0; j < x_.cols(); ++j) {
      std::sort(samples.begin(), samples.end(), [&](std::size_t a, std::size_t b) {
        return std::make_tuple(x_(a, j), grad_[a].g, grad_[a].h) <
               std::make_tuple(x_(b, j), grad_[b].g, grad_[b].h);
      });
      double g_total = 0.0, h_total = 0.0;
      for (std::size_t i : samples) {
        g_total += grad_[i].g;
        h_total += grad_[i].h;
      }
      double parent = g_total * g_total / h_total;
      double gl = 0.0, hl = 0.0;
      for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        gl += grad_[samples[k]].g;
        hl += grad_[samples[k]].h;
        double lo = x_(samples[k], j);
        double hi = x_(samples[k + 1], j);
        if (!(lo < hi)) continue;
        double gr = g_total - gl;
        double hr = h_total - hl;
        if (!child_ok(hl) || !child_ok(hr)) continue;
        double gain = 0.5 * (gl * gl / hl + gr * gr / hr - parent);
        // Strict comparison keeps the lowest feature and threshold on ties.
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = static_cast<int>(j);
          best.threshold = lo + 0.5 * (hi - lo);
        }
      }
    }
    return best;
  }

  int build(RegressionTree& tree, std::vector<std::size_t> samples, int depth) {
    int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    auto [g, h] = totals(samples);
    tree.nodes[index].weight = h > 0.0 ? -g / h : 0.0;
    if (depth >= params_.max_depth || samples.size() < 2) return index;

    Split split = best_split(samples);
    if (split.feature < 0) return index;

    std::vector<std::size_t> left, right;
    auto j = static_cast<std::size_t>(split.feature);
    for (std::size_t i : samples) (x_(i, j) < split.threshold ? left : right).push_back(i);
    tree.nodes[index].feature = split.feature;
    tree.nodes[index].threshold = split.threshold;
    int l = build(tree, std::move(left), depth + 1);
    int r = build(tree, std::move(right), depth + 1);
    tree.nodes[index].left = l;
    tree.nodes[index].right = r;
    return index;
  }

  const FeatureMatrix& x_;
  std::span<const GradPair> grad_;
  const BoostParams& params_;
};

}  // namespace

BoostModel fit(const FeatureMatrix& features, std::span<const int> labels,
               std::span<const double> init_scores, const BoostParams& params,
               const IterationObserver& observer) {
  params.check();
  const std::size_t n = features.rows();
  if (n == 0) throw InvalidArgument("empty training set");
  if (labels.size() != n || init_scores.size() != n)
    throw InvalidArgument("features, labels and init scores differ in length");
  for (int y : labels)
    if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
  for (double s : init_scores)
    if (!std::isfinite(s)) throw InvalidArgument("init scores must be finite");

  std::vector<double> scores(n);
  std::transform(init_scores.begin(), init_scores.end(), scores.begin(), clamp_init);

  const auto bag_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(params.bag_fraction * static_cast<double>(n))));
  Rng rng = make_rng(params.seed);
  std::vector<std::size_t> order(n);
  std::vector<GradPair> grad(n);
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.iterations));
  TreeGrower grower(features, grad, params);

  for (int m = 0; m < params.iterations; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      double p = sigmoid(scores[i]);
      grad[i] = {p - labels[i], p * (1.0 - p)};
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (bag_size < n) {
      // Partial Fisher-Yates: the first bag_size entries are a uniform subset.
      for (std::size_t i = 0; i < bag_size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(order[i], order[pick(rng)]);
      }
    }
    std::vector<std::size_t> bag(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(bag_size));
    trees.push_back(grower.grow(std::move(bag)));

    const RegressionTree& tree = trees.back();
    for (std::size_t i = 0; i < n; ++i) scores[i] += params.shrinkage * tree.evaluate(features.row(i));
    if (observer) observer(m + 1, scores);
  }
  return BoostModel(params, features.names(), std::move(trees));
}

std::vector<double> predict(const BoostModel& model, const FeatureMatrix& features,
                            std::span<const double> init_scores) {
  if (features.names() != model.features())
    throw InvalidArgument("feature schema does not match the model");
  if (init_scores.size() != features.rows())
    throw InvalidArgument("init scores and features differ in length");
  std::vector<double> out(features.rows());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = sigmoid(clamp_init(init_scores[i]) + model.margin(features.row(i)));
  return out;
}

}  // namespace mendelboost
