#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "margin_forge/bounds.hpp"
#include "margin_forge/dataset.hpp"
#include "margin_forge/ensemble.hpp"
#include "margin_forge/error.hpp"
#include "margin_forge/experiment.hpp"
#include "margin_forge/margins.hpp"
#include "margin_forge/report.hpp"
#include "margin_forge/reweight.hpp"
#include "margin_forge/simplex.hpp"

namespace fs = std::filesystem;
using namespace margin_forge;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct DataArgs {
  std::string path;
  int label_column = -1;
  char delimiter = 0;
  std::string header = "auto";

  LoadOptions options() const {
    LoadOptions o;
    o.format = format_from_path(path);
    o.label_column = label_column;
    o.delimiter = delimiter;
    if (header == "yes") o.header = true;
    else if (header == "no") o.header = false;
    return o;
  }
  Dataset load() const { return load_dataset(path, options()); }
};

void add_data_options(CLI::App* cmd, DataArgs& d, const std::string& flag) {
  if (flag.empty())
    cmd->add_option("path", d.path, "Delimited or sparse-index data file")->required();
  else
    cmd->add_option(flag, d.path, "Delimited or sparse-index data file")->required();
  cmd->add_option("--label-column", d.label_column, "Label column; negative counts from the end");
  cmd->add_option("--delimiter", d.delimiter, "Field delimiter (default: tab if present, else comma)");
  cmd->add_option("--header", d.header, "Header row: auto, yes or no")->check(CLI::IsMember({"auto", "yes", "no"}));
}

std::string nan_blank(double v) { return std::isnan(v) ? std::string{} : fmt::format("{:.10g}", v); }

void print_bound(const BoundReport& b) {
  fmt::print("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(b.kind), b.applicable ? 1 : 0,
             nan_blank(b.value), nan_blank(b.empirical_term), nan_blank(b.complexity_term), nan_blank(b.theta),
             nan_blank(b.vc_dim), nan_blank(b.n), nan_blank(b.delta), nan_blank(b.theta0), nan_blank(b.hspace),
             nan_blank(b.breiman_r), nan_blank(b.gibbs_risk), nan_blank(b.disagreement),
             nan_blank(b.gibbs_risk_from_margins), nan_blank(b.disagreement_from_margins), nan_blank(b.value_squared),
             b.reason);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble margin analysis: training, reweighting, bounds and experiments"};
  app.require_subcommand(1);

  // data
  auto* data = app.add_subcommand("data", "Inspect or split a dataset");
  data->require_subcommand(1);
  DataArgs info_args;
  auto* info = data->add_subcommand("info", "Print size and class balance");
  add_data_options(info, info_args, "");

  DataArgs split_args;
  double split_frac = 0.7;
  std::uint64_t split_seed = 1;
  std::string split_out;
  auto* split = data->add_subcommand("split", "Stratified train/test split");
  add_data_options(split, split_args, "");
  split->add_option("--frac", split_frac, "Training fraction")->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", split_seed, "Split seed");
  split->add_option("--out", split_out, "Write <out>_train.csv and <out>_test.csv");

  // train
  DataArgs train_args;
  std::string train_method = "adaboost", train_out;
  std::size_t train_T = 100, train_mtry = 0;
  std::uint64_t train_seed = 1;
  TreeParams train_tree;
  auto* train = app.add_subcommand("train", "Train an ensemble and write a model snapshot");
  add_data_options(train, train_args, "--data");
  train->add_option("--method", train_method, "adaboost, random-forest or bagging");
  train->add_option("-T,--trees", train_T, "Number of learners");
  train->add_option("--seed", train_seed, "Seed for bootstrap and feature draws");
  train->add_option("--depth", train_tree.max_depth, "Maximum tree depth");
  train->add_option("--leaves", train_tree.max_leaves, "Maximum leaves per tree");
  train->add_option("--mtry", train_mtry, "Features per forest tree (0 = ceil(sqrt(p)))");
  train->add_option("--out", train_out, "Snapshot path")->required();

  // reweight
  DataArgs rew_args;
  std::string rew_model, rew_scheme = "uws", rew_out, rew_dump;
  auto* rew = app.add_subcommand("reweight", "Re-solve the vote weights of a snapshot");
  rew->add_option("--model", rew_model, "Model snapshot")->required();
  add_data_options(rew, rew_args, "--data");
  rew->add_option("--scheme", rew_scheme, "uws | ews[:k] | pws[:xi] | sm1[:xi] | sm2[:mean]");
  rew->add_option("--out", rew_out, "Write the report here instead of stdout");
  rew->add_option("--dump-lp", rew_dump, "Write the linear program in plain text (MM and SM1)");

  // bounds
  DataArgs bnd_args;
  std::string bnd_model;
  double bnd_theta = 0.1, bnd_vc = 0.0, bnd_delta = 0.05, bnd_hspace = 0.0;
  std::optional<double> bnd_theta0;
  auto* bnd = app.add_subcommand("bounds", "Evaluate margin bounds on training data (empirical plug-in)");
  bnd->add_option("--model", bnd_model, "Model snapshot")->required();
  add_data_options(bnd, bnd_args, "--data");
  bnd->add_option("--theta", bnd_theta, "Margin threshold for the Schapire terms");
  bnd->add_option("--vc", bnd_vc, "VC dimension of the weak-learner space")->required();
  bnd->add_option("--delta", bnd_delta, "Confidence parameter");
  bnd->add_option("--hspace", bnd_hspace, "Size of the finite hypothesis space (Breiman); 0 skips it");
  bnd->add_option("--theta0", bnd_theta0, "Minimum margin for Breiman (default: observed minimum)");

  // experiment
  std::string exp_config, exp_out = "results", exp_family, exp_scheme;
  std::vector<std::size_t> exp_cmd;
  auto* exp = app.add_subcommand("experiment", "Run the repeated-simulation comparison");
  exp->add_option("--config", exp_config, "key = value config file")->required();
  exp->add_option("--out", exp_out, "Output prefix for <out>.csv and <out>.txt");
  exp->add_option("--table", exp_family, "margin-improve, percentile or reduction (default from first scheme)");
  exp->add_option("--scheme", exp_scheme, "Scheme column to tabulate (default: first of the family)");
  exp->add_option("--cmd", exp_cmd, "Also export CMD series of one full-data model at these T checkpoints")
      ->delimiter(',');

  // cmd
  DataArgs cmd_args;
  std::string cmd_model, cmd_prefix = "cmd";
  std::vector<std::size_t> cmd_T;
  auto* cmdc = app.add_subcommand("cmd", "Export cumulative margin distributions of a snapshot");
  cmdc->add_option("--model", cmd_model, "Model snapshot")->required();
  add_data_options(cmdc, cmd_args, "--data");
  cmdc->add_option("--checkpoints", cmd_T, "Learner counts, e.g. 50,200,500")->delimiter(',')->required();
  cmdc->add_option("--prefix", cmd_prefix, "Output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (info->parsed()) {
      const auto d = info_args.load();
      fmt::print("name,{}\nrows,{}\nfeatures,{}\nnegative,{}\npositive,{}\n", d.name(), d.rows(), d.cols(),
                 d.count_label(-1), d.count_label(+1));
    } else if (split->parsed()) {
      const auto d = split_args.load();
      const auto s = stratified_split(d, SplitSpec{split_frac, true, split_seed});
      fmt::print("part,rows,negative,positive\n");
      fmt::print("train,{},{},{}\n", s.train.rows(), s.train.count_label(-1), s.train.count_label(+1));
      fmt::print("test,{},{},{}\n", s.test.rows(), s.test.count_label(-1), s.test.count_label(+1));
      if (!split_out.empty()) {
        write_delimited(s.train, split_out + "_train.csv");
        write_delimited(s.test, split_out + "_test.csv");
      }
    } else if (train->parsed()) {
      train_tree.validate();
      const auto d = train_args.load();
      const auto model = train_ensemble(method_from_string(train_method), d, train_T, train_tree, train_seed,
                                        train_mtry);
      save_model(model, train_out);
      fmt::print("method,{}\nlearners,{}\ntraining_error,{:.6f}\n", to_string(model.method), model.size(),
                 test_error(model, d));
      if (!model.stop_reason.empty()) fmt::print("stopped,{}\n", model.stop_reason);
    } else if (rew->parsed()) {
      const auto spec = RewSpec::parse(rew_scheme);
      const auto model = load_model(rew_model);
      const auto d = rew_args.load();
      const auto H = prediction_matrix(model, d);
      if (!rew_dump.empty()) {
        const auto before = compute_margins(H, model.weights);
        std::optional<LpProblem> lp;
        if (spec.scheme == Scheme::kUWS) lp = mm_problem(H, before.margins(), uws_r(H.rows()));
        else if (spec.scheme == Scheme::kEWS) lp = mm_problem(H, before.margins(), ews_r(before.margins(), spec.k));
        else if (spec.scheme == Scheme::kPWS) lp = mm_problem(H, before.margins(), pws_r(before.margins(), spec.xi));
        else if (spec.scheme == Scheme::kSM1) lp = sm1_problem(H, before.margins(), spec.xi);
        if (!lp) throw ConfigError("--dump-lp applies to the linear-program schemes only");
        std::ofstream f(rew_dump);
        if (!f) throw Error("cannot write " + rew_dump);
        dump_problem(*lp, f);
      }
      const auto res = reweight(H, model.weights, spec);
      std::string out = fmt::format("key,value\nscheme,{}\nfeasible,{}\nlp_status,{}\nobjective,{:.12g}\n",
                                    spec.label(), res.feasible ? 1 : 0, to_string(res.lp_status), res.objective);
      out += fmt::format("mean_before,{:.12g}\nmean_after,{:.12g}\n", res.before.mean(), res.after.mean());
      out += fmt::format("min_before,{:.12g}\nmin_after,{:.12g}\n", res.before.min(), res.after.min());
      out += fmt::format("mean_improvement,{:.12g}\nmin_improvement,{:.12g}\n", res.improvement.mean,
                         res.improvement.min);
      out += fmt::format("variance_reduction,{:.12g}\nrange_reduction,{:.12g}\n", res.variance_reduction,
                         res.range_reduction);
      if (spec.scheme == Scheme::kSM2)
        out += fmt::format("sse_raw,{:.12g}\nsse_original,{:.12g}\n", res.sse_raw, res.sse_original);
      for (std::size_t t = 0; t < res.weights.size(); ++t)
        out += fmt::format("w{},{:.17g}\n", t, res.weights[t]);
      if (rew_out.empty()) {
        std::cout << out;
      } else {
        std::ofstream f(rew_out);
        if (!f) throw Error("cannot write " + rew_out);
        f << out;
      }
    } else if (bnd->parsed()) {
      const auto model = load_model(bnd_model);
      const auto d = bnd_args.load();
      const auto H = prediction_matrix(model, d);
      const auto prof = compute_margins(H, model.weights);
      const double n = static_cast<double>(d.rows());
      fmt::print("# empirical plug-in values on the supplied data\n");
      fmt::print("bound,applicable,value,empirical_term,complexity_term,theta,vc_dim,n,delta,theta0,hspace,"
                 "breiman_r,gibbs_risk,disagreement,gibbs_risk_from_margins,disagreement_from_margins,value_squared,reason\n");
      print_bound(schapire_terms(prof, bnd_theta, bnd_vc, n));
      if (bnd_hspace > 0.0) print_bound(breiman_bound(bnd_theta0.value_or(prof.min()), bnd_hspace, n, bnd_delta));
      print_bound(germain_bound(H, model.weights));
    } else if (exp->parsed()) {
      const auto cfg = load_config(exp_config);
      // Reject bad table and checkpoint options before the long run.
      const auto family = exp_family.empty() ? default_family(cfg.schemes.front())
                                             : table_family_from_string(exp_family);
      for (std::size_t T : exp_cmd)
        if (T == 0 || T > cfg.trees)
          throw ConfigError(fmt::format("CMD checkpoint T = {} outside 1..{}", T, cfg.trees));
      const auto reports = run_experiments(cfg);
      write_results_csv(reports, exp_out + ".csv");
      const auto table = render_table(reports, family,
                                      exp_scheme.empty() ? std::nullopt : std::optional<std::string>(exp_scheme));
      std::ofstream(exp_out + ".txt") << table;
      std::cout << table;
      if (!exp_cmd.empty()) {
        for (const auto& ref : cfg.datasets) {
          const auto in = resolve_dataset(ref);
          const auto model = train_ensemble(cfg.method, in.data, cfg.trees, cfg.tree_params, cfg.seed, cfg.m_try);
          auto stem = fs::path(ref.source).stem().string();
          if (!ref.name.empty()) stem = ref.name;
          for (char& c : stem)
            if (c == ':' || c == '=' || c == '/') c = '_';
          for (const auto& p : export_cmd_series(model, in.data, exp_cmd, exp_out + "_cmd_" + stem))
            fmt::print("wrote {}\n", p.string());
        }
      }
    } else if (cmdc->parsed()) {
      const auto model = load_model(cmd_model);
      const auto d = cmd_args.load();
      for (const auto& s : cmd_series(model, d, cmd_T))
        fmt::print("T={} min={:.6f} p05={:.6f} mean={:.6f}\n", s.rounds, s.profile.min(), s.profile.percentile(0.05),
                   s.profile.mean());
      for (const auto& p : export_cmd_series(model, d, cmd_T, cmd_prefix)) fmt::print("wrote {}\n", p.string());
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntimeError;
  }
  return kOk;
}
