#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "margin_forge/error.hpp"
#include "margin_forge/experiment.hpp"
#include "margin_forge/report.hpp"
#include "test_helpers.hpp"

using namespace margin_forge;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  DatasetRef ref;
  ref.source = "synthetic:two-gaussians:n=80:noise=0.8:dims=3:seed=4";
  ref.name = "tiny";
  cfg.datasets = {ref};
  cfg.method = Method::kAdaBoost;
  cfg.trees = 15;
  cfg.tree_params = TreeParams{2, 4};
  cfg.schemes = {RewSpec::parse("uws"), RewSpec::parse("pws:0.1"), RewSpec::parse("sm2")};
  cfg.simulations = 3;
  cfg.seed = 9;
  cfg.max_rows = 0;
  return cfg;
}

}  // namespace

TEST_CASE("experiments are reproducible bit for bit") {
  auto cfg = tiny_config();
  auto a = run_experiments(cfg);
  auto b = run_experiments(cfg);
  REQUIRE(a.size() == 1);
  CHECK(results_csv(a) == results_csv(b));
  CHECK(a[0].records[0].seed != a[0].records[1].seed);
  CHECK(a[0].records[0].train_indices != a[0].records[1].train_indices);
}

TEST_CASE("records, aggregates and recomputed baselines") {
  auto cfg = tiny_config();
  cfg.keep_models = true;
  const auto input = resolve_dataset(cfg.datasets[0]);
  auto rep = run_experiment(cfg, input);
  REQUIRE(rep.successful() == 3);
  CHECK(rep.resampling == "train/test split and ensemble randomness");

  double base = 0.0, uws = 0.0;
  for (const auto& r : rep.records) {
    base += r.baseline_error / 3.0;
    uws += r.schemes[0].test_error / 3.0;
    CHECK(r.schemes[0].min_improvement >= -1e-7);
    for (const auto& s : r.schemes) CHECK(s.learner_hash == r.learner_hash);
    REQUIRE(r.model);
    CHECK(learner_hash(r.model->learners) == r.learner_hash);
    const auto test = input.data.subset(r.test_indices);
    CHECK(test_error(*r.model, test) == r.baseline_error);
    CHECK(r.train_indices.size() + r.test_indices.size() == input.data.rows());
  }
  CHECK(std::abs(rep.mean_baseline_error - base) <= 1e-12);
  REQUIRE(rep.summaries.size() == 3);
  CHECK(std::abs(rep.summaries[0].mean_test_error - uws) <= 1e-12);
  CHECK(rep.summaries[0].label == "UWS");
  CHECK(rep.summaries[1].label == "PWS.10");
}

TEST_CASE("frozen randomness") {
  auto cfg = tiny_config();
  cfg.freeze_split = true;
  cfg.method = Method::kRandomForest;
  auto rep = run_experiments(cfg)[0];
  CHECK(rep.resampling == "ensemble randomness only");
  CHECK(rep.records[0].train_indices == rep.records[1].train_indices);
  CHECK(rep.records[0].learner_hash != rep.records[1].learner_hash);
  cfg.freeze_ensemble = true;
  cfg.freeze_split = false;
  rep = run_experiments(cfg)[0];
  CHECK(rep.resampling == "train/test split only");
}

TEST_CASE("table families") {
  auto cfg = tiny_config();
  cfg.method = Method::kRandomForest;
  auto reps = run_experiments(cfg);
  const auto mm = render_table(reps, TableFamily::kMarginImprove, "UWS");
  std::istringstream lines(mm);
  std::string header;
  std::getline(lines, header);
  std::istringstream words(header);
  std::vector<std::string> cols;
  for (std::string w; words >> w;) cols.push_back(w);
  CHECK(cols == std::vector<std::string>{"Data", "Set", "RF", "UWS", "Mean", "Min"});
  CHECK(mm.find("tiny") != std::string::npos);

  CHECK(render_table(reps, TableFamily::kPercentile).find("PWS.10") != std::string::npos);
  CHECK(render_table(reps, TableFamily::kReduction, "SM2").find("Range") != std::string::npos);
  CHECK_THROWS_AS(render_table(reps, TableFamily::kReduction, "UWS"), ConfigError);
  CHECK_THROWS_AS(render_table(reps, TableFamily::kMarginImprove, "EWS5"), ConfigError);
  std::vector<ExperimentReport> none;
  CHECK_THROWS_AS(render_table(none, TableFamily::kMarginImprove), ConfigError);

  CHECK(default_family(RewSpec::parse("ews")) == TableFamily::kMarginImprove);
  CHECK(default_family(RewSpec::parse("sm1")) == TableFamily::kReduction);
  CHECK(table_family_from_string("percentile") == TableFamily::kPercentile);
  CHECK_THROWS_AS(table_family_from_string("pie"), ConfigError);
}

TEST_CASE("results csv layout") {
  auto reps = run_experiments(tiny_config());
  const auto csv = results_csv(reps);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("dataset,method,simulation,seed,ok,baseline_error", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3 * 3);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config("dataset = x.csv\nschemes = uws\nsims = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dataset = x.csv\nschemes =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dataset = x.csv\nschemes = uws\nbogus = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("dataset = x.csv\nschemes = uws\nT = -2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schemes = uws\n"), ConfigError);
  auto cfg = parse_config(
      "# comment\n"
      "dataset = synthetic:ring-vs-disk:n=50\n"
      "name = ring\n"
      "method = rf\n"
      "T = 20\n"
      "schemes = uws, ews:2, sm1\n"
      "sims = 4\n"
      "seed = 11\n"
      "depth = 3\n"
      "freeze_split = true\n");
  CHECK(cfg.method == Method::kRandomForest);
  CHECK(cfg.trees == 20);
  CHECK(cfg.schemes.size() == 3);
  CHECK(cfg.schemes[1].k == 2);
  CHECK(cfg.simulations == 4);
  CHECK(cfg.freeze_split);
  CHECK(cfg.datasets.at(0).name == "ring");
  CHECK(cfg.tree_params.max_depth == 3);
}

TEST_CASE("cmd export") {
  auto d = generate_synthetic(SyntheticKind::kRingVsDisk, 150, 0.5, 2);
  auto m = adaboost(d, 60, TreeParams{2, 4});
  REQUIRE(m.size() >= 20);
  std::vector<std::size_t> cps{5, 20};
  auto prefix = std::filesystem::temp_directory_path() / "margin_forge_tests" / "cmd";
  std::filesystem::create_directories(prefix.parent_path());
  auto paths = export_cmd_series(m, d, cps, prefix);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].filename() == "cmd_T5.csv");
  std::ifstream in(paths[1]);
  std::string line;
  std::getline(in, line);
  double prev_theta = -2.0, prev_f = 0.0;
  while (std::getline(in, line)) {
    auto comma = line.find(',');
    const double theta = std::stod(line.substr(0, comma)), f = std::stod(line.substr(comma + 1));
    CHECK(theta > prev_theta);
    CHECK(f >= prev_f);
    prev_theta = theta;
    prev_f = f;
  }
  CHECK(prev_f == doctest::Approx(1.0));
  std::vector<std::size_t> zero{0};
  CHECK_THROWS_AS(cmd_series(m, d, zero), ConfigError);
  std::vector<std::size_t> big{m.size() + 1};
  CHECK_THROWS_AS(cmd_series(m, d, big), ConfigError);
}
