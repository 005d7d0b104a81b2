#include "mendelboost/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mendelboost/error.hpp"
#include "mendelboost/mendelian.hpp"
#include "mendelboost/parallel.hpp"
#include "mendelboost/recalibration.hpp"
#include "mendelboost/rng.hpp"
#include "mendelboost/simulator.hpp"

namespace mendelboost {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mendelian: return "mendelian";
    case ModelKind::gb: return "gb";
    case ModelKind::gb_with_mendelian: return "gb_with_mendelian";
    case ModelKind::platt_on: return "platt_on";
    case ModelKind::isotonic_on: return "isotonic_on";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  for (ModelKind k : {ModelKind::mendelian, ModelKind::gb, ModelKind::gb_with_mendelian,
                      ModelKind::platt_on, ModelKind::isotonic_on})
    if (to_string(k) == text) return k;
  throw InvalidArgument("unknown model kind '" + std::string(text) + "'");
}

const std::vector<std::string>& standard_cancers() {
  static const std::vector<std::string> cancers = {"CRC", "EC", "GC"};
  return cancers;
}

CancerSite cancer_site(const std::string& cancer) {
  if (cancer == "EC") return {cancer, Sex::female};
  if (cancer == "CRC" || cancer == "GC") return {cancer, std::nullopt};
  throw InvalidArgument("unknown cancer '" + cancer + "'");
}

namespace {

ModelSpec mendelian(std::string id, std::string description,
                    std::vector<PenetranceChoice> penetrance) {
  ModelSpec m;
  m.id = std::move(id);
  m.description = std::move(description);
  m.kind = ModelKind::mendelian;
  m.penetrance = std::move(penetrance);
  return m;
}

ModelSpec learner(std::string id, std::string description, ModelKind kind,
                  std::vector<std::string> features, std::string base) {
  ModelSpec m;
  m.id = std::move(id);
  m.description = std::move(description);
  m.kind = kind;
  m.features = std::move(features);
  m.base = std::move(base);
  return m;
}

}  // namespace

std::vector<ModelSpec> default_models() {
  const double mis = kMisspecifiedExponent;
  return {
      mendelian("1", "Mendelian, misspecified CRC/EC, no GC", {{"CRC", mis}, {"EC", mis}}),
      learner("2", "GB from sample log odds, CRC/EC features", ModelKind::gb, {"CRC", "EC"}, ""),
      learner("3", "GB from model 1, CRC/EC features", ModelKind::gb_with_mendelian,
              {"CRC", "EC"}, "1"),
      mendelian("4", "Mendelian, misspecified CRC/EC, GC through data-generating penetrance",
                {{"CRC", mis}, {"EC", mis}, {"GC", 1.0}}),
      learner("5", "GB from sample log odds, CRC/EC/GC features", ModelKind::gb,
              {"CRC", "EC", "GC"}, ""),
      learner("6", "GB from model 1, CRC/EC/GC features", ModelKind::gb_with_mendelian,
              {"CRC", "EC", "GC"}, "1"),
      mendelian("7", "Oracle Mendelian, CRC/EC", {{"CRC", 1.0}, {"EC", 1.0}}),
      mendelian("8", "Oracle Mendelian, CRC/EC/GC", {{"CRC", 1.0}, {"EC", 1.0}, {"GC", 1.0}}),
      learner("9", "Platt scaling of model 1", ModelKind::platt_on, {}, "1"),
      learner("10", "Isotonic regression of model 1", ModelKind::isotonic_on, {}, "1"),
  };
}

std::vector<ModelSpec> gc_exponent_sweep(const std::vector<double>& exponents) {
  std::vector<ModelSpec> out;
  int id = 15;
  for (double c : exponents) {
    std::ostringstream desc;
    desc << "Mendelian, misspecified CRC/EC, GC survival exponent " << c;
    out.push_back(mendelian(std::to_string(id++), desc.str(),
                            {{"CRC", kMisspecifiedExponent}, {"EC", kMisspecifiedExponent},
                             {"GC", c}}));
  }
  return out;
}

ExperimentConfig default_experiment() {
  ExperimentConfig config;
  config.models = default_models();
  return config;
}

const ModelSpec& ExperimentConfig::model(const std::string& id) const {
  for (const auto& m : models)
    if (m.id == id) return m;
  throw InvalidArgument("no model with id '" + id + "'");
}

void ExperimentConfig::check() const {
  if (datasets == 0) throw InvalidArgument("datasets must be positive");
  if (families < 2) throw InvalidArgument("families must be at least 2");
  if (validation == Validation::mc_cv && replicates == 0)
    throw InvalidArgument("replicates must be positive");
  if (validation == Validation::bootstrap && transportability())
    throw InvalidArgument("bootstrap validation needs matching train and test penetrances");
  if (models.empty()) throw InvalidArgument("no models configured");
  std::set<std::string> ids;
  for (const auto& m : models) {
    if (m.id.empty()) throw InvalidArgument("model with empty id");
    if (!ids.insert(m.id).second) throw InvalidArgument("duplicate model id '" + m.id + "'");
  }
  model(baseline);
  for (const auto& m : models) {
    switch (m.kind) {
      case ModelKind::mendelian:
        if (m.penetrance.empty())
          throw InvalidArgument("model " + m.id + ": Mendelian model without penetrances");
        for (const auto& p : m.penetrance) {
          cancer_site(p.cancer);
          if (!(p.exponent > 0.0) || !std::isfinite(p.exponent))
            throw InvalidArgument("model " + m.id + ": exponents must be positive");
        }
        break;
      case ModelKind::gb:
      case ModelKind::gb_with_mendelian:
        if (m.features.empty()) throw InvalidArgument("model " + m.id + ": no features");
        for (const auto& f : m.features) cancer_site(f);
        m.boost.check();
        if (m.kind == ModelKind::gb) break;
        [[fallthrough]];
      case ModelKind::platt_on:
      case ModelKind::isotonic_on:
        if (model(m.base).kind != ModelKind::mendelian)
          throw InvalidArgument("model " + m.id + ": base must be a Mendelian model");
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Configuration files

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<PenetranceChoice> parse_penetrance_list(const std::string& text) {
  std::vector<PenetranceChoice> out;
  for (const auto& item : split_list(text)) {
    auto colon = item.find(':');
    PenetranceChoice p;
    p.cancer = trim(item.substr(0, colon));
    if (colon != std::string::npos) {
      try {
        p.exponent = std::stod(item.substr(colon + 1));
      } catch (const std::exception&) {
        throw ParseError("bad penetrance exponent in '" + item + "'");
      }
    }
    out.push_back(p);
  }
  return out;
}

Validation parse_validation(const std::string& text) {
  if (text == "mc_cv") return Validation::mc_cv;
  if (text == "bootstrap") return Validation::bootstrap;
  throw ParseError("unknown validation '" + text + "'");
}

OeRule parse_oe_rule(const std::string& text) {
  if (text == "log_ratio") return OeRule::log_ratio;
  if (text == "abs_difference") return OeRule::abs_difference;
  throw ParseError("unknown oe_rule '" + text + "'");
}

// Missing keys take the fallback; malformed values are errors.
template <typename T>
T get_or(const boost::property_tree::ptree& tree, const std::string& key, T fallback) {
  auto child = tree.get_child_optional(key);
  if (!child) return fallback;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (trim(child->data()).rfind('-', 0) == 0)
      throw ParseError("config key '" + key + "': must not be negative");
  }
  try {
    return child->get_value<T>();
  } catch (const boost::property_tree::ptree_error& e) {
    throw ParseError("config key '" + key + "': " + e.what());
  }
}

void apply_boost_keys(const boost::property_tree::ptree& s, BoostParams& p) {
  p.iterations = get_or(s, "iterations", p.iterations);
  p.max_depth = get_or(s, "max_depth", p.max_depth);
  p.shrinkage = get_or(s, "shrinkage", p.shrinkage);
  p.bag_fraction = get_or(s, "bag_fraction", p.bag_fraction);
  p.min_child_weight = get_or(s, "min_child_weight", p.min_child_weight);
}

}  // namespace

ExperimentConfig load_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  ExperimentConfig config;
  // Copied: the fallback for a missing section is a temporary.
  const boost::property_tree::ptree exp = tree.get_child("experiment", {});
  config.train_penetrance =
      parse_crc_ec_level(get_or<std::string>(exp, "train_penetrance", "low"));
  config.test_penetrance = parse_crc_ec_level(
      get_or<std::string>(exp, "test_penetrance",
                          std::string(to_string(config.train_penetrance))));
  config.gc_penetrance = parse_gc_level(get_or<std::string>(exp, "gc_penetrance", "high"));
  config.datasets = get_or(exp, "datasets", config.datasets);
  config.families = get_or(exp, "families", config.families);
  config.replicates = get_or(exp, "replicates", config.replicates);
  config.bootstrap_samples = get_or(exp, "bootstrap_samples", config.bootstrap_samples);
  config.validation = parse_validation(get_or<std::string>(exp, "validation", "mc_cv"));
  config.seed = get_or(exp, "seed", config.seed);
  config.threads = get_or(exp, "threads", config.threads);
  config.baseline = get_or<std::string>(exp, "baseline", config.baseline);
  config.oe_rule = parse_oe_rule(get_or<std::string>(exp, "oe_rule", "log_ratio"));
  config.include_counselee = get_or(exp, "include_counselee", config.include_counselee);

  BoostParams shared;
  apply_boost_keys(exp, shared);

  for (const auto& preset : split_list(get_or<std::string>(exp, "models", "default"))) {
    std::vector<ModelSpec> add;
    if (preset == "default") {
      add = default_models();
    } else if (preset == "gc_sweep") {
      std::vector<double> exps;
      for (const auto& e : split_list(get_or<std::string>(exp, "gc_exponents", "0.25,0.5,2,4")))
        exps.push_back(std::stod(e));
      add = gc_exponent_sweep(exps);
    } else if (preset != "none") {
      throw ParseError("unknown model preset '" + preset + "'");
    }
    config.models.insert(config.models.end(), add.begin(), add.end());
  }
  for (auto& m : config.models) m.boost = shared;

  for (const auto& [section, body] : tree) {
    if (section.rfind("model:", 0) != 0) continue;
    ModelSpec spec;
    spec.id = section.substr(6);
    spec.boost = shared;
    spec.kind = parse_model_kind(get_or<std::string>(body, "kind", "mendelian"));
    spec.description = get_or<std::string>(body, "description", "");
    spec.penetrance = parse_penetrance_list(get_or<std::string>(body, "penetrance", ""));
    spec.features = split_list(get_or<std::string>(body, "features", ""));
    spec.base = get_or<std::string>(body, "base", "");
    apply_boost_keys(body, spec.boost);
    auto it = std::find_if(config.models.begin(), config.models.end(),
                           [&](const ModelSpec& m) { return m.id == spec.id; });
    if (it != config.models.end())
      *it = spec;
    else
      config.models.push_back(spec);
  }
  config.check();
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  return load_config(in);
}

std::string list_models(const ExperimentConfig& config) {
  std::ostringstream out;
  out << std::left << std::setw(5) << "id" << std::setw(19) << "kind" << std::setw(24)
      << "penetrance" << std::setw(13) << "features" << std::setw(6) << "base" << std::setw(6)
      << "iter" << "description\n";
  for (const auto& m : config.models) {
    std::string pen, feat;
    for (const auto& p : m.penetrance) {
      std::ostringstream s;
      s << p.cancer << '^' << p.exponent;
      pen += (pen.empty() ? "" : " ") + s.str();
    }
    for (const auto& f : m.features) feat += (feat.empty() ? "" : " ") + f;
    bool boosted = m.kind == ModelKind::gb || m.kind == ModelKind::gb_with_mendelian;
    out << std::setw(5) << m.id << std::setw(19) << to_string(m.kind) << std::setw(24)
        << (pen.empty() ? "-" : pen) << std::setw(13) << (feat.empty() ? "-" : feat)
        << std::setw(6) << (m.base.empty() ? "-" : m.base) << std::setw(6)
        << (boosted ? std::to_string(m.boost.iterations) : "-") << m.description << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Running

namespace {

// Everything the model procedures of one dataset read. Immutable once built.
struct DatasetContext {
  std::vector<int> labels;
  FeatureMatrix features;                      // all cancers, every family
  std::map<std::string, std::vector<double>> scores;  // Mendelian id -> carrier probability
};

PenetranceSet model_tables(const ModelSpec& spec, const PenetranceSet& generating) {
  std::vector<std::string> cancers;
  for (const auto& p : spec.penetrance) cancers.push_back(p.cancer);
  PenetranceSet set = generating.subset(cancers);
  for (const auto& p : spec.penetrance)
    if (p.exponent != 1.0) set = set.with_exponent(p.cancer, p.exponent);
  return set;
}

std::vector<double> clamped_logits(std::span<const double> p, std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[i] = std::clamp(logit(p[idx[i]]), -kInitScoreBound, kInitScoreBound);
  return out;
}

std::vector<double> pick(std::span<const double> v, std::span<const std::size_t> idx) {
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

std::vector<int> pick(std::span<const int> v, std::span<const std::size_t> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

std::vector<ModelProcedure> build_procedures(const ExperimentConfig& config,
                                             const DatasetContext& ctx) {
  std::vector<ModelProcedure> procs;
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    const ModelSpec& spec = config.models[mi];
    ModelProcedure proc;
    proc.name = spec.id;
    switch (spec.kind) {
      case ModelKind::mendelian: {
        const auto& scores = ctx.scores.at(spec.id);
        proc.trainable = false;
        proc.fit_predict = [&scores](auto, std::span<const std::size_t> test, std::uint64_t) {
          return pick(scores, test);
        };
        break;
      }
      case ModelKind::gb:
      case ModelKind::gb_with_mendelian: {
        std::vector<std::size_t> cols;
        for (const auto& f : spec.features) cols.push_back(ctx.features.column("z_" + f));
        const std::vector<double>* base =
            spec.kind == ModelKind::gb_with_mendelian ? &ctx.scores.at(spec.base) : nullptr;
        proc.fit_predict = [&ctx, &spec, cols, base, mi](std::span<const std::size_t> train,
                                                         std::span<const std::size_t> test,
                                                         std::uint64_t seed) {
          std::vector<int> y = pick(ctx.labels, train);
          std::vector<double> init_train, init_test;
          if (base) {
            init_train = clamped_logits(*base, train);
            init_test = clamped_logits(*base, test);
          } else {
            init_train = default_init(y);
            init_test.assign(test.size(), init_train.front());
          }
          BoostParams params = spec.boost;
          params.seed = stream_seed(seed, {mi});
          BoostModel model = fit(ctx.features.select(train, cols), y, init_train, params);
          return predict(model, ctx.features.select(test, cols), init_test);
        };
        break;
      }
      case ModelKind::platt_on:
      case ModelKind::isotonic_on: {
        const auto& scores = ctx.scores.at(spec.base);
        bool platt = spec.kind == ModelKind::platt_on;
        proc.fit_predict = [&ctx, &scores, platt](std::span<const std::size_t> train,
                                                  std::span<const std::size_t> test,
                                                  std::uint64_t) {
          std::vector<int> y = pick(ctx.labels, train);
          std::vector<double> p_train = pick(scores, train);
          std::vector<double> p_test = pick(scores, test);
          if (platt) return platt_apply(platt_fit(p_train, y), p_test);
          return isotonic_apply(isotonic_fit(p_train, y), p_test);
        };
        break;
      }
    }
    procs.push_back(std::move(proc));
  }
  return procs;
}

struct DatasetOutcome {
  std::vector<std::vector<MetricReport>> reports;
  std::size_t resampled = 0;
};

DatasetOutcome run_dataset(const ExperimentConfig& config, std::size_t d, unsigned threads) {
  const PenetranceSet train_tables = standin_penetrance(config.train_penetrance, config.gc_penetrance);
  SimulationScenario scenario;
  scenario.n_families = config.families;
  scenario.tables = train_tables;
  scenario.seed = stream_seed(config.seed, {d, 0});
  scenario.id_prefix = "d" + std::to_string(d + 1) + "_";
  std::vector<SimulatedFamily> families = simulate_families(scenario, threads);
  if (config.transportability()) {
    SimulationScenario test = scenario;
    test.tables = standin_penetrance(config.test_penetrance, config.gc_penetrance);
    test.seed = stream_seed(config.seed, {d, 1});
    test.id_prefix = "d" + std::to_string(d + 1) + "t_";
    auto extra = simulate_families(test, threads);
    families.insert(families.end(), std::make_move_iterator(extra.begin()),
                    std::make_move_iterator(extra.end()));
  }

  DatasetContext ctx;
  std::vector<std::string> names;
  std::vector<CancerSite> sites;
  for (const auto& c : standard_cancers()) {
    names.push_back("z_" + c);
    sites.push_back(cancer_site(c));
  }
  ctx.features = FeatureMatrix(0, names);
  FeatureOptions options;
  options.include_counselee = config.include_counselee;
  for (const auto& f : families) {
    ctx.labels.push_back(f.counselee_carrier() ? 1 : 0);
    ctx.features.push_row(extract_features(f.pedigree, sites, options));
  }

  for (const auto& spec : config.models) {
    if (spec.kind != ModelKind::mendelian) continue;
    CarrierProbabilityEngine engine(model_tables(spec, train_tables), scenario.allele_freqs);
    std::vector<double> scores(families.size());
    parallel_for(families.size(), threads, [&](std::size_t i) {
      scores[i] = engine.peel(families[i].pedigree).carrier_probability;
    });
    ctx.scores.emplace(spec.id, std::move(scores));
  }

  auto procs = build_procedures(config, ctx);
  std::uint64_t eval_seed = stream_seed(config.seed, {d, 2});
  ValidationResult v;
  if (config.validation == Validation::bootstrap) {
    v = bootstrap_validate(ctx.labels, procs, config.bootstrap_samples, eval_seed, threads);
  } else {
    std::vector<std::size_t> train_pool(config.families), test_pool(config.families);
    for (std::size_t i = 0; i < config.families; ++i) {
      train_pool[i] = i;
      test_pool[i] = config.transportability() ? config.families + i : i;
    }
    v = monte_carlo_cv(ctx.labels, procs, config.replicates, eval_seed, train_pool, test_pool,
                       threads);
  }
  return {std::move(v.reports), v.resampled_splits};
}

}  // namespace

ExperimentResult run(const ExperimentConfig& config) {
  config.check();
  ExperimentResult result;
  for (const auto& m : config.models) result.model_ids.push_back(m.id);
  result.raw.resize(config.datasets);
  std::vector<std::size_t> resampled(config.datasets, 0);

  // Parallelize across datasets when there are several, inside otherwise.
  const bool outer = config.datasets > 1;
  parallel_for(config.datasets, outer ? config.threads : 1, [&](std::size_t d) {
    try {
      auto outcome = run_dataset(config, d, outer ? 1 : config.threads);
      result.raw[d] = std::move(outcome.reports);
      resampled[d] = outcome.resampled;
    } catch (const Error& e) {
      throw Error("dataset " + std::to_string(d + 1) + ": " + e.what());
    }
  });
  for (auto r : resampled) result.resampled_splits += r;

  std::vector<std::vector<MetricReport>> units;
  if (config.datasets > 1) {
    for (const auto& dataset : result.raw) units.push_back(average_reports(dataset));
  } else {
    units = result.raw.front();
  }
  auto baseline = static_cast<std::size_t>(
      std::find(result.model_ids.begin(), result.model_ids.end(), config.baseline) -
      result.model_ids.begin());
  result.aggregate = aggregate(units, result.model_ids, baseline, config.oe_rule);
  return result;
}

void write_metrics_csv(std::ostream& out, const ExperimentResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "dataset,replicate,model,metric,value\n";
  for (std::size_t d = 0; d < result.raw.size(); ++d)
    for (std::size_t r = 0; r < result.raw[d].size(); ++r)
      for (std::size_t m = 0; m < result.raw[d][r].size(); ++m)
        for (Metric metric : kMetrics)
          os << d + 1 << ',' << r + 1 << ',' << result.model_ids[m] << ',' << to_string(metric)
             << ',' << result.raw[d][r][m].get(metric) << '\n';
  out << os.str();
}

void write_aggregate_csv(std::ostream& out, const ExperimentResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "model,metric,mean,ci_lo,ci_hi,improvement_pct\n";
  for (const auto& row : result.aggregate) {
    os << row.model << ',' << to_string(row.metric) << ',' << row.mean << ',' << row.ci_lo << ','
       << row.ci_hi << ',';
    if (!std::isnan(row.improvement_pct)) os << row.improvement_pct;
    os << '\n';
  }
  out << os.str();
}

void write_deciles_csv(std::ostream& out, const ExperimentResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "model,replicate,bin,mean_pred,obs_frac,n,ci_lo,ci_hi\n";
  if (!result.raw.empty()) {
    const auto& dataset = result.raw.front();
    for (std::size_t m = 0; m < result.model_ids.size(); ++m)
      for (std::size_t r = 0; r < dataset.size(); ++r) {
        const auto& bins = dataset[r][m].deciles;
        for (std::size_t b = 0; b < bins.size(); ++b)
          os << result.model_ids[m] << ',' << r + 1 << ',' << b + 1 << ','
             << bins[b].mean_prediction << ',' << bins[b].observed_fraction << ',' << bins[b].n
             << ',' << bins[b].ci_lo << ',' << bins[b].ci_hi << '\n';
      }
  }
  out << os.str();
}

}  // namespace mendelboost
