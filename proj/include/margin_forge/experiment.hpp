#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "margin_forge/dataset.hpp"
#include "margin_forge/ensemble.hpp"
#include "margin_forge/reweight.hpp"
#include "margin_forge/stats.hpp"

namespace margin_forge {

/// A dataset named in a config: a file (optionally paired with a designated
/// test file) or a synthetic generator spec
/// "synthetic:<kind>[:n=..][:noise=..][:dims=..][:seed=..]".
struct DatasetRef {
  std::string source;
  std::optional<std::string> test_source;
  std::string name;  // display name; defaults to the file stem
  LoadOptions load;
};

struct DatasetInput {
  Dataset data;
  std::optional<Dataset> test;  // designated test file, skips splitting
};

DatasetInput resolve_dataset(const DatasetRef& ref);

struct ExperimentConfig {
  std::vector<DatasetRef> datasets;
  Method method = Method::kAdaBoost;
  std::size_t trees = 100;
  TreeParams tree_params;
  std::size_t m_try = 0;
  std::vector<RewSpec> schemes;
  std::size_t simulations = 30;
  double train_fraction = 0.7;
  double alpha_level = 0.05;
  std::uint64_t seed = 1;
  double vc_dim = 0.0;  // echoed for bound reports; 0 = unset
  /// Rows kept per dataset (stratified subsample); 0 keeps everything.
  std::size_t max_rows = 1000;
  /// Hold the split (or the ensemble randomness) fixed across simulations.
  bool freeze_split = false;
  bool freeze_ensemble = false;
  /// Keep each simulation's model in the report (memory heavy at scale).
  bool keep_models = false;

  void validate() const;
};

/// Reads the key = value format (one pair per line, '#' comments). Keys:
/// dataset (repeatable), test, name, label_column, format, method, T, schemes,
/// sims, seed, alpha, depth, leaves, mtry, vc, train_fraction, max_rows,
/// freeze_split, freeze_ensemble. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct SchemeOutcome {
  std::string label;
  double test_error = 0.0;
  double mean_improvement = 0.0;
  double min_improvement = 0.0;
  double variance_reduction = 0.0;
  double range_reduction = 0.0;
  double objective = 0.0;
  bool feasible = true;
  std::uint64_t learner_hash = 0;
};

struct SimulationRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double baseline_error = 0.0;
  std::size_t ensemble_size = 0;
  std::uint64_t learner_hash = 0;
  std::vector<SchemeOutcome> schemes;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::optional<EnsembleModel> model;
};

struct SchemeSummary {
  std::string label;
  double mean_test_error = 0.0;
  double mean_improvement = 0.0;
  double min_improvement = 0.0;
  double variance_reduction = 0.0;
  double range_reduction = 0.0;
  std::size_t infeasible = 0;
  /// baseline errors (first) vs scheme errors (second).
  PairedTTest comparison;
};

struct ExperimentReport {
  std::string dataset;
  Method method = Method::kAdaBoost;
  std::size_t trees = 0;
  std::size_t simulations = 0;
  double alpha_level = 0.05;
  std::uint64_t seed = 0;
  double vc_dim = 0.0;
  bool designated_test = false;
  std::string resampling;  // what varies across simulations
  std::vector<SimulationRecord> records;
  double mean_baseline_error = 0.0;
  std::vector<SchemeSummary> summaries;

  std::size_t successful() const;
};

/// Runs config.simulations independent simulations on one dataset. Each derives
/// its seed from (config.seed, index), splits 70/30 (unless a test file is
/// given), trains the baseline, then applies every scheme to the same trees.
/// Throws Error if fewer than two simulations succeed.
ExperimentReport run_experiment(const ExperimentConfig& config, const DatasetInput& input);
std::vector<ExperimentReport> run_experiments(const ExperimentConfig& config);

/// Recomputes the aggregate block of a report from its records.
void summarize(ExperimentReport& report);

}  // namespace margin_forge
