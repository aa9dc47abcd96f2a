#include "margin_forge/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>

#include "margin_forge/error.hpp"
#include "margin_forge/margins.hpp"
#include "margin_forge/rng.hpp"

namespace margin_forge {

namespace {

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream is(s);
  while (std::getline(is, part, sep)) out.push_back(strip(part));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
}

std::size_t to_count(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (d < 0 || d != std::floor(d)) throw ConfigError("config key '" + key + "': expected a nonnegative integer");
  return static_cast<std::size_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean");
}

Dataset synthetic_from_spec(const std::string& spec) {
  auto parts = split_on(spec, ':');
  if (parts.size() < 2) throw ConfigError("synthetic spec needs a kind: " + spec);
  auto kind = synthetic_kind_from_string(parts[1]);
  std::size_t n = 200, dims = 2;
  double noise = 0.0;
  std::uint64_t seed = 1;
  for (std::size_t k = 2; k < parts.size(); ++k) {
    auto eq = parts[k].find('=');
    if (eq == std::string::npos) throw ConfigError("synthetic option needs key=value: " + parts[k]);
    auto key = parts[k].substr(0, eq);
    auto val = parts[k].substr(eq + 1);
    if (key == "n") n = to_count(key, val);
    else if (key == "noise") noise = to_double(key, val);
    else if (key == "dims") dims = to_count(key, val);
    else if (key == "seed") seed = to_count(key, val);
    else throw ConfigError("unknown synthetic option '" + key + "'");
  }
  return generate_synthetic(kind, n, noise, seed, dims);
}

Dataset load_source(const std::string& source, const LoadOptions& base) {
  if (source.rfind("synthetic:", 0) == 0) return synthetic_from_spec(source);
  LoadOptions opt = base;
  opt.format = format_from_path(source);
  return load_dataset(source, opt);
}

Dataset renamed(const Dataset& d, const std::string& name) {
  std::vector<double> f(d.features().begin(), d.features().end());
  std::vector<int> y(d.labels().begin(), d.labels().end());
  return Dataset(name, d.rows(), d.cols(), std::move(f), std::move(y), d.feature_names());
}

}  // namespace

DatasetInput resolve_dataset(const DatasetRef& ref) {
  DatasetInput in{load_source(ref.source, ref.load), std::nullopt};
  if (!ref.name.empty()) in.data = renamed(in.data, ref.name);
  if (ref.test_source) {
    in.test = load_source(*ref.test_source, ref.load);
    if (in.test->cols() != in.data.cols()) throw DataError("test file feature count differs from training file");
  }
  return in;
}

void ExperimentConfig::validate() const {
  if (trees == 0) throw ConfigError("T must be >= 1");
  tree_params.validate();
  if (schemes.empty()) throw ConfigError("at least one reweighting scheme is required");
  for (const auto& s : schemes) s.validate();
  if (simulations < 2) throw ConfigError("sims must be >= 2 for paired t-tests");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0,1)");
  if (!(alpha_level > 0.0 && alpha_level < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (vc_dim < 0.0) throw ConfigError("vc must be >= 0");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::size_t lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = strip(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = strip(line.substr(0, eq));
    const auto val = strip(line.substr(eq + 1));
    auto last_dataset = [&]() -> DatasetRef& {
      if (cfg.datasets.empty()) throw ConfigError("config key '" + key + "' must follow a dataset line");
      return cfg.datasets.back();
    };
    if (key == "dataset") cfg.datasets.push_back(DatasetRef{val, std::nullopt, {}, {}});
    else if (key == "test") last_dataset().test_source = val;
    else if (key == "name") last_dataset().name = val;
    else if (key == "label_column") last_dataset().load.label_column = static_cast<int>(to_double(key, val));
    else if (key == "method") cfg.method = method_from_string(val);
    else if (key == "T" || key == "trees") cfg.trees = to_count(key, val);
    else if (key == "schemes") {
      cfg.schemes.clear();
      for (const auto& s : split_on(val, ','))
        if (!s.empty()) cfg.schemes.push_back(RewSpec::parse(s));
    } else if (key == "sims") cfg.simulations = to_count(key, val);
    else if (key == "seed") cfg.seed = to_count(key, val);
    else if (key == "alpha") cfg.alpha_level = to_double(key, val);
    else if (key == "depth") cfg.tree_params.max_depth = static_cast<int>(to_count(key, val));
    else if (key == "leaves") cfg.tree_params.max_leaves = static_cast<int>(to_count(key, val));
    else if (key == "mtry") cfg.m_try = to_count(key, val);
    else if (key == "vc") cfg.vc_dim = to_double(key, val);
    else if (key == "train_fraction") cfg.train_fraction = to_double(key, val);
    else if (key == "max_rows") cfg.max_rows = to_count(key, val);
    else if (key == "freeze_split") cfg.freeze_split = to_bool(key, val);
    else if (key == "freeze_ensemble") cfg.freeze_ensemble = to_bool(key, val);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (cfg.datasets.empty()) throw ConfigError("config names no dataset");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::size_t ExperimentReport::successful() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.ok; }));
}

namespace {

SimulationRecord run_simulation(const ExperimentConfig& cfg, const DatasetInput& input, std::size_t s) {
  SimulationRecord rec;
  rec.index = s;
  rec.seed = derive_seed(cfg.seed, s);
  const std::uint64_t split_seed = cfg.freeze_split ? derive_seed(cfg.seed, 0xA11) : derive_seed(rec.seed, 1);
  const std::uint64_t model_seed = cfg.freeze_ensemble ? derive_seed(cfg.seed, 0xB22) : derive_seed(rec.seed, 2);

  Dataset train, test;
  if (input.test) {
    train = input.data;
    test = *input.test;
  } else {
    auto split = stratified_split(input.data, SplitSpec{cfg.train_fraction, true, split_seed});
    train = std::move(split.train);
    test = std::move(split.test);
    rec.train_indices = std::move(split.train_indices);
    rec.test_indices = std::move(split.test_indices);
  }

  auto model = train_ensemble(cfg.method, train, cfg.trees, cfg.tree_params, model_seed, cfg.m_try);
  const auto H_train = prediction_matrix(model, train);
  const auto H_test = prediction_matrix(model, test);
  rec.baseline_error = test_error(H_test, model.weights);
  rec.ensemble_size = model.size();
  rec.learner_hash = learner_hash(model.learners);

  for (const auto& spec : cfg.schemes) {
    const auto res = reweight(H_train, model.weights, spec);
    SchemeOutcome out;
    out.label = spec.label();
    out.test_error = test_error(H_test, res.weights);
    out.mean_improvement = res.improvement.mean;
    out.min_improvement = res.improvement.min;
    out.variance_reduction = res.variance_reduction;
    out.range_reduction = res.range_reduction;
    out.objective = res.objective;
    out.feasible = res.feasible;
    // Reweighting only touches the vote weights.
    out.learner_hash = learner_hash(model.learners);
    rec.schemes.push_back(std::move(out));
  }
  if (cfg.keep_models) rec.model = std::move(model);
  return rec;
}

}  // namespace

void summarize(ExperimentReport& report) {
  std::vector<const SimulationRecord*> ok;
  for (const auto& r : report.records)
    if (r.ok) ok.push_back(&r);
  report.summaries.clear();
  report.mean_baseline_error = 0.0;
  if (ok.empty()) return;
  const auto S = static_cast<double>(ok.size());
  std::vector<double> base;
  for (const auto* r : ok) base.push_back(r->baseline_error);
  for (double e : base) report.mean_baseline_error += e / S;

  const std::size_t nschemes = ok.front()->schemes.size();
  for (std::size_t k = 0; k < nschemes; ++k) {
    SchemeSummary sum;
    sum.label = ok.front()->schemes[k].label;
    std::vector<double> errs;
    for (const auto* r : ok) {
      const auto& o = r->schemes[k];
      errs.push_back(o.test_error);
      sum.mean_test_error += o.test_error / S;
      sum.mean_improvement += o.mean_improvement / S;
      sum.min_improvement += o.min_improvement / S;
      sum.variance_reduction += o.variance_reduction / S;
      sum.range_reduction += o.range_reduction / S;
      if (!o.feasible) ++sum.infeasible;
    }
    if (ok.size() >= 2) sum.comparison = paired_t_test(base, errs, report.alpha_level);
    report.summaries.push_back(std::move(sum));
  }
}

ExperimentReport run_experiment(const ExperimentConfig& config, const DatasetInput& input) {
  config.validate();
  DatasetInput prepared{config.max_rows ? subsample(input.data, config.max_rows, derive_seed(config.seed, 0xD5))
                                        : input.data,
                        input.test};

  ExperimentReport report;
  report.dataset = input.data.name();
  report.method = config.method;
  report.trees = config.trees;
  report.simulations = config.simulations;
  report.alpha_level = config.alpha_level;
  report.seed = config.seed;
  report.vc_dim = config.vc_dim;
  report.designated_test = input.test.has_value();
  if (report.designated_test)
    report.resampling = config.freeze_ensemble ? "none" : "ensemble randomness only (designated test file)";
  else if (config.freeze_split && config.freeze_ensemble)
    report.resampling = "none";
  else if (config.freeze_split)
    report.resampling = "ensemble randomness only";
  else if (config.freeze_ensemble)
    report.resampling = "train/test split only";
  else
    report.resampling = "train/test split and ensemble randomness";
  report.records.resize(config.simulations);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(config.simulations); ++si) {
    const auto s = static_cast<std::size_t>(si);
    try {
      report.records[s] = run_simulation(config, prepared, s);
    } catch (const std::exception& e) {
      auto& rec = report.records[s];
      rec = SimulationRecord{};
      rec.index = s;
      rec.seed = derive_seed(config.seed, s);
      rec.ok = false;
      rec.error = e.what();
    }
  }

  summarize(report);
  if (report.successful() < 2) {
    std::string why;
    for (const auto& r : report.records)
      if (!r.ok) {
        why = r.error;
        break;
      }
    throw Error("experiment on '" + report.dataset + "' has fewer than two successful simulations: " + why);
  }
  return report;
}

std::vector<ExperimentReport> run_experiments(const ExperimentConfig& config) {
  config.validate();
  std::vector<ExperimentReport> out;
  for (const auto& ref : config.datasets) out.push_back(run_experiment(config, resolve_dataset(ref)));
  return out;
}

}  // namespace margin_forge
