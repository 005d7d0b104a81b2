#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mendelboost/booster.hpp"
#include "mendelboost/error.hpp"
#include "mendelboost/evaluation.hpp"
#include "mendelboost/experiment.hpp"
#include "mendelboost/io.hpp"
#include "mendelboost/mendelian.hpp"
#include "mendelboost/parallel.hpp"
#include "mendelboost/random_instances.hpp"
#include "mendelboost/simulator.hpp"

namespace fs = std::filesystem;
using namespace mendelboost;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  fs::path path = dir / name;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "CRC:0.5,EC" -> cancers with survival exponents (default 1).
std::vector<PenetranceChoice> parse_choices(const std::string& text) {
  std::vector<PenetranceChoice> out;
  for (const auto& item : split_commas(text)) {
    auto colon = item.find(':');
    PenetranceChoice c;
    c.cancer = item.substr(0, colon);
    if (colon != std::string::npos) {
      try {
        c.exponent = std::stod(item.substr(colon + 1));
      } catch (const std::exception&) {
        throw InvalidArgument("bad exponent in '" + item + "'");
      }
      if (!(c.exponent > 0.0)) throw InvalidArgument("exponents must be positive: '" + item + "'");
    }
    out.push_back(c);
  }
  return out;
}

// Keys by family id; every id in `keys` must be present in `values`.
template <typename T>
std::vector<const T*> align(const std::vector<std::string>& keys, const std::vector<T>& values,
                            const std::string& what) {
  std::map<std::string, const T*> by_id;
  for (const auto& v : values)
    if (!by_id.emplace(v.family_id, &v).second)
      throw InvalidArgument(what + ": duplicate family id " + v.family_id);
  std::vector<const T*> out;
  for (const auto& k : keys) {
    auto it = by_id.find(k);
    if (it == by_id.end()) throw InvalidArgument(what + ": no row for family " + k);
    out.push_back(it->second);
  }
  return out;
}

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true) {
  if (with_config)
    cmd->add_option("--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Root random seed");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", c.out_dir, "Directory for output files");
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::size_t families = 1000;
  std::string crc_ec;
  std::string gc;
};

int simulate(const SimulateArgs& a, CLI::App* cmd) {
  ExperimentConfig config = a.common.config.empty() ? default_experiment()
                                                    : load_config_file(a.common.config);
  SimulationScenario s;
  s.n_families = a.families;
  s.seed = cmd->count("--seed") || a.common.config.empty() ? a.common.seed : config.seed;
  CrcEcLevel level = a.crc_ec.empty() ? config.train_penetrance : parse_crc_ec_level(a.crc_ec);
  GcLevel gc = a.gc.empty() ? config.gc_penetrance : parse_gc_level(a.gc);
  s.tables = standin_penetrance(level, gc);
  auto families = simulate_families(s, a.common.threads);

  std::vector<std::string> ids;
  std::vector<FamilyRecord> records;
  for (std::size_t i = 0; i < families.size(); ++i) {
    ids.push_back(std::to_string(i + 1));
    records.push_back({ids.back(), families[i].pedigree});
  }
  fs::path dir(a.common.out_dir);
  auto ped = open_output(dir, "pedigrees.csv");
  write_pedigrees(ped, records);
  auto truth = open_output(dir, "truth.csv");
  write_truth(truth, ids, families, s.tables.space());
  auto pen = open_output(dir, "penetrance.csv");
  write_penetrance(pen, s.tables);

  std::size_t carriers = 0, members = 0;
  for (const auto& f : families) {
    carriers += f.counselee_carrier();
    members += f.pedigree.size();
  }
  std::cout << "simulated " << families.size() << " families (CRC/EC " << to_string(level)
            << ", GC " << to_string(gc) << "), mean size "
            << static_cast<double>(members) / static_cast<double>(families.size()) << ", "
            << carriers << " carrier counselees\n"
            << "wrote pedigrees.csv, truth.csv, penetrance.csv to " << dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  Common common;
  std::string pedigrees;
  std::string penetrance;
  std::string crc_ec = "low";
  std::string gc = "high";
  std::string genes = "MLH1,MSH2,MSH6";
  std::vector<double> allele_frequencies;
  std::string cancers;
};

int score(const ScoreArgs& a) {
  std::vector<std::string> genes = split_commas(a.genes);
  PenetranceSet tables;
  if (a.penetrance.empty()) {
    if (genes != mmr_genes()) throw InvalidArgument("built-in tables cover MLH1, MSH2, MSH6 only");
    tables = standin_penetrance(parse_crc_ec_level(a.crc_ec), parse_gc_level(a.gc));
  } else {
    auto in = open_input(a.penetrance);
    tables = read_penetrance(in, genes);
  }
  if (!a.cancers.empty()) {
    auto choices = parse_choices(a.cancers);
    std::vector<std::string> names;
    for (const auto& c : choices) names.push_back(c.cancer);
    tables = tables.subset(names);
    for (const auto& c : choices)
      if (c.exponent != 1.0) tables = tables.with_exponent(c.cancer, c.exponent);
  }
  AlleleFrequencies freqs;
  if (a.allele_frequencies.empty())
    freqs = AlleleFrequencies::uniform(genes.size(), kSimulationAlleleFrequency);
  else if (a.allele_frequencies.size() == 1)
    freqs = AlleleFrequencies::uniform(genes.size(), a.allele_frequencies[0]);
  else
    freqs.q = a.allele_frequencies;
  freqs.check(tables.space());

  auto in = open_input(a.pedigrees);
  auto families = read_pedigrees(in);
  CarrierProbabilityEngine engine(tables, freqs);
  std::vector<ScoreRecord> scores(families.size());
  parallel_for(families.size(), a.common.threads, [&](std::size_t i) {
    try {
      auto post = engine.peel(families[i].pedigree);
      scores[i] = {families[i].family_id, families[i].pedigree.counselee_id(),
                   post.carrier_probability, post.log_likelihood};
    } catch (const Error& e) {
      throw Error("family " + families[i].family_id + ": " + e.what());
    }
  });
  auto out = open_output(a.common.out_dir, "scores.csv");
  write_scores(out, scores);
  std::cout << "scored " << scores.size() << " families; wrote "
            << (fs::path(a.common.out_dir) / "scores.csv").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  Common common;
  std::string pedigrees;
  std::string truth;
  std::string scores;
  std::string features = "CRC,EC,GC";
  std::string apply;
  bool exclude_counselee = false;
  BoostParams boost;
};

int fit_command(const FitArgs& a) {
  auto ped_in = open_input(a.pedigrees);
  auto families = read_pedigrees(ped_in);
  std::vector<std::string> ids;
  for (const auto& f : families) ids.push_back(f.family_id);

  std::optional<BoostModel> model;
  std::vector<std::string> features;
  if (!a.apply.empty()) {
    auto in = open_input(a.apply);
    model = BoostModel::load(in);
    for (const auto& name : model->features()) {
      if (name.rfind("z_", 0) != 0) throw InvalidArgument("unexpected feature name " + name);
      features.push_back(name.substr(2));
    }
  } else {
    features = split_commas(a.features);
  }
  std::vector<CancerSite> sites;
  std::vector<std::string> names;
  for (const auto& f : features) {
    sites.push_back(cancer_site(f));
    names.push_back("z_" + f);
  }
  FeatureOptions options;
  options.include_counselee = !a.exclude_counselee;
  FeatureMatrix x(0, names);
  for (const auto& f : families) x.push_row(extract_features(f.pedigree, sites, options));

  std::optional<std::vector<double>> init;
  if (!a.scores.empty()) {
    auto in = open_input(a.scores);
    auto scores = read_scores(in);
    init.emplace();
    for (const auto* s : align(ids, scores, "scores"))
      init->push_back(std::clamp(logit(s->carrier_probability), -kInitScoreBound, kInitScoreBound));
  }

  if (!model) {
    if (a.truth.empty()) throw InvalidArgument("fitting needs --truth");
    auto in = open_input(a.truth);
    auto truth = read_truth(in);
    std::vector<int> labels;
    for (const auto* t : align(ids, truth, "truth")) labels.push_back(t->carrier);
    if (!init) init = default_init(labels);
    BoostParams params = a.boost;
    params.seed = a.common.seed;
    model = fit(x, labels, *init, params);
    auto out = open_output(a.common.out_dir, "model.txt");
    model->save(out);
  } else if (!init) {
    throw InvalidArgument("applying a model needs --scores for the initial log odds");
  }

  auto pred = predict(*model, x, *init);
  std::vector<ScoreRecord> records;
  for (std::size_t i = 0; i < families.size(); ++i)
    records.push_back({ids[i], families[i].pedigree.counselee_id(), pred[i], std::nullopt});
  auto out = open_output(a.common.out_dir, "predictions.csv");
  write_scores(out, records);
  std::cout << (a.apply.empty() ? "fitted " : "applied ") << model->trees().size()
            << " trees on features";
  for (const auto& f : features) std::cout << ' ' << f;
  std::cout << "; wrote " << (a.apply.empty() ? "model.txt and " : "") << "predictions.csv to "
            << a.common.out_dir << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  Common common;
  std::string truth;
  std::string scores;
};

int evaluate(const EvaluateArgs& a) {
  auto truth_in = open_input(a.truth);
  auto truth = read_truth(truth_in);
  auto scores_in = open_input(a.scores);
  auto scores = read_scores(scores_in);
  std::vector<std::string> ids;
  std::vector<int> labels;
  for (const auto& t : truth) {
    ids.push_back(t.family_id);
    labels.push_back(t.carrier);
  }
  std::vector<double> pred;
  for (const auto* s : align(ids, scores, "scores")) pred.push_back(s->carrier_probability);
  MetricReport r = evaluate_predictions(labels, pred);

  std::ostringstream metrics;
  metrics.precision(17);
  metrics << "metric,value\n";
  for (Metric m : kMetrics) metrics << to_string(m) << ',' << r.get(m) << '\n';
  std::ostringstream deciles;
  deciles.precision(17);
  deciles << "bin,mean_pred,obs_frac,n,ci_lo,ci_hi\n";
  for (std::size_t b = 0; b < r.deciles.size(); ++b) {
    const auto& d = r.deciles[b];
    deciles << b + 1 << ',' << d.mean_prediction << ',' << d.observed_fraction << ',' << d.n << ','
            << d.ci_lo << ',' << d.ci_hi << '\n';
  }
  open_output(a.common.out_dir, "metrics.csv") << metrics.str();
  open_output(a.common.out_dir, "deciles.csv") << deciles.str();

  std::cout << labels.size() << " families\n";
  for (Metric m : kMetrics) std::cout << "  " << to_string(m) << " = " << r.get(m) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  Common common;
  std::size_t families = 0;
  std::size_t datasets = 0;
  std::size_t replicates = 0;
  bool list_only = false;
};

int experiment(const ExperimentArgs& a, CLI::App* cmd) {
  ExperimentConfig config = a.common.config.empty() ? default_experiment()
                                                    : load_config_file(a.common.config);
  if (cmd->count("--seed")) config.seed = a.common.seed;
  if (cmd->count("--threads")) config.threads = a.common.threads;
  if (cmd->count("--families")) config.families = a.families;
  if (cmd->count("--datasets")) config.datasets = a.datasets;
  if (cmd->count("--replicates")) config.replicates = a.replicates;
  config.check();

  const std::string models = list_models(config);
  if (a.list_only) {
    std::cout << models;
    return 0;
  }
  std::cout << models << '\n'
            << config.datasets << " datasets x " << config.families << " families, "
            << (config.validation == Validation::mc_cv
                    ? std::to_string(config.replicates) + " MC-CV replicates"
                    : std::to_string(config.bootstrap_samples) + " bootstrap samples")
            << ", seed " << config.seed << ", " << config.threads << " threads\n";
  ExperimentResult result = run(config);

  fs::path dir(a.common.out_dir);
  { auto out = open_output(dir, "metrics.csv"); write_metrics_csv(out, result); }
  { auto out = open_output(dir, "aggregate.csv"); write_aggregate_csv(out, result); }
  { auto out = open_output(dir, "deciles.csv"); write_deciles_csv(out, result); }
  open_output(dir, "models.txt") << models;

  std::cout << "\nmodel  metric          mean     95% CI               IP\n";
  for (const auto& row : result.aggregate) {
    std::printf("%-6s %-14s %8.4f  (%7.4f, %7.4f)  ", row.model.c_str(),
                std::string(to_string(row.metric)).c_str(), row.mean, row.ci_lo, row.ci_hi);
    if (std::isnan(row.improvement_pct))
      std::printf("   -\n");
    else
      std::printf("%4.0f%%\n", row.improvement_pct);
  }
  if (result.resampled_splits > 0)
    std::cout << result.resampled_splits << " splits redrawn for a single-class half\n";
  std::cout << "wrote metrics.csv, aggregate.csv, deciles.csv, models.txt to " << dir.string()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  Common common;
  std::size_t pedigrees = 200;
  std::size_t max_members = 5;
  std::size_t max_genes = 2;
  double tolerance = 1e-10;
};

int oracle(const OracleArgs& a) {
  OracleCheckReport r = oracle_check(a.pedigrees, a.common.seed, a.max_members, a.max_genes);
  bool ok = r.max_abs_difference <= a.tolerance;
  std::cout << (ok ? "PASS" : "FAIL") << ": " << r.pedigrees
            << " random pedigrees, max |peeling - enumeration| = " << r.max_abs_difference
            << " (tolerance " << a.tolerance << "), " << r.seconds << " s\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mendelian carrier probabilities extended by gradient boosting"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate families; write pedigree, truth and penetrance CSVs");
  add_common(sim_cmd, sim.common);
  sim_cmd->add_option("--families", sim.families, "Number of families")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--crc-ec", sim.crc_ec, "CRC/EC penetrance level (low or high)");
  sim_cmd->add_option("--gc", sim.gc, "GC penetrance level (high or low)");

  ScoreArgs sc;
  auto* score_cmd = app.add_subcommand("score", "Mendelian carrier probabilities for a pedigree CSV");
  add_common(score_cmd, sc.common, false);
  score_cmd->add_option("--pedigrees", sc.pedigrees, "Pedigree CSV")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--penetrance", sc.penetrance, "Penetrance CSV (default: built-in tables)")
      ->check(CLI::ExistingFile);
  score_cmd->add_option("--crc-ec", sc.crc_ec, "Built-in CRC/EC level");
  score_cmd->add_option("--gc", sc.gc, "Built-in GC level");
  score_cmd->add_option("--genes", sc.genes, "Comma-separated gene list");
  score_cmd->add_option("--allele-frequency", sc.allele_frequencies,
                        "One frequency for all genes, or one per gene");
  score_cmd->add_option("--cancers", sc.cancers,
                        "Cancers to model with survival exponents, e.g. CRC:0.5,EC:0.5");

  FitArgs ft;
  auto* fit_cmd = app.add_subcommand("fit", "Fit (or apply) a boosted model on family-history features");
  add_common(fit_cmd, ft.common, false);
  fit_cmd->add_option("--pedigrees", ft.pedigrees, "Pedigree CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--truth", ft.truth, "Truth CSV with carrier labels")->check(CLI::ExistingFile);
  fit_cmd->add_option("--scores", ft.scores, "Scores CSV used as initial log odds")
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("--features", ft.features, "Comma-separated cancers (CRC, EC, GC)");
  fit_cmd->add_option("--apply", ft.apply, "Existing model file to apply instead of fitting")
      ->check(CLI::ExistingFile);
  fit_cmd->add_flag("--exclude-counselee", ft.exclude_counselee,
                    "Leave the counselee out of the feature proportions");
  fit_cmd->add_option("--iterations", ft.boost.iterations, "Boosting iterations");
  fit_cmd->add_option("--max-depth", ft.boost.max_depth, "Tree depth");
  fit_cmd->add_option("--shrinkage", ft.boost.shrinkage, "Learning rate");
  fit_cmd->add_option("--bag-fraction", ft.boost.bag_fraction, "Subsample fraction per tree");
  fit_cmd->add_option("--min-child-weight", ft.boost.min_child_weight, "Minimum hessian per leaf");

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Metrics of predictions against true carrier status");
  add_common(eval_cmd, ev.common, false);
  eval_cmd->add_option("--truth", ev.truth, "Truth CSV")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--scores", ev.scores, "Scores or predictions CSV")->required()->check(CLI::ExistingFile);

  ExperimentArgs ex;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a simulation experiment and aggregate metrics");
  add_common(exp_cmd, ex.common);
  exp_cmd->add_option("--families", ex.families, "Families per dataset")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--datasets", ex.datasets, "Simulated datasets")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--replicates", ex.replicates, "MC-CV replicates")->check(CLI::PositiveNumber);
  exp_cmd->add_flag("--list-models", ex.list_only, "Print the configured models and exit");

  OracleArgs orc;
  auto* orc_cmd = app.add_subcommand("oracle-check", "Compare peeling with exhaustive enumeration");
  add_common(orc_cmd, orc.common, false);
  orc_cmd->add_option("--pedigrees", orc.pedigrees, "Number of random pedigrees");
  orc_cmd->add_option("--max-members", orc.max_members, "Largest pedigree size");
  orc_cmd->add_option("--max-genes", orc.max_genes, "Largest gene count");
  orc_cmd->add_option("--tolerance", orc.tolerance, "Largest allowed posterior difference");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim_cmd) return simulate(sim, sim_cmd);
    if (*score_cmd) return score(sc);
    if (*fit_cmd) return fit_command(ft);
    if (*eval_cmd) return evaluate(ev);
    if (*exp_cmd) return experiment(ex, exp_cmd);
    if (*orc_cmd) return oracle(orc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
