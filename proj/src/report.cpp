#include "margin_forge/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "margin_forge/error.hpp"

namespace margin_forge {

namespace {

bool starts_with(const std::string& s, const char* p) { return s.rfind(p, 0) == 0; }

bool label_in_family(const std::string& label, TableFamily f) {
  switch (f) {
    case TableFamily::kMarginImprove:
      return starts_with(label, "UWS") || starts_with(label, "EWS") || starts_with(label, "PWS");
    case TableFamily::kPercentile: return starts_with(label, "PWS");
    case TableFamily::kReduction: return starts_with(label, "SM1") || starts_with(label, "SM2");
  }
  return false;
}

const SchemeSummary* find_summary(const ExperimentReport& r, const std::string& label) {
  for (const auto& s : r.summaries)
    if (s.label == label) return &s;
  return nullptr;
}

std::string num(double v) { return fmt::format("{:.4f}", std::abs(v) < 5e-5 ? 0.0 : v); }

std::string layout(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c == 0)
        out += fmt::format("{:<{}}", rows[r][c], width[c]);
      else
        out += fmt::format("  {:>{}}", rows[r][c], width[c]);
    }
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out += std::string(total - 2, '-') + '\n';
    }
  }
  return out;
}

}  // namespace

std::string to_string(TableFamily f) {
  switch (f) {
    case TableFamily::kMarginImprove: return "margin-improve";
    case TableFamily::kPercentile: return "percentile";
    case TableFamily::kReduction: return "reduction";
  }
  return "?";
}

TableFamily table_family_from_string(const std::string& s) {
  if (s == "margin-improve" || s == "margin") return TableFamily::kMarginImprove;
  if (s == "percentile") return TableFamily::kPercentile;
  if (s == "reduction") return TableFamily::kReduction;
  throw ConfigError("unknown table family '" + s + "'");
}

TableFamily default_family(const RewSpec& spec) {
  return spec.is_mm() ? TableFamily::kMarginImprove : TableFamily::kReduction;
}

std::string base_label(Method m) {
  switch (m) {
    case Method::kAdaBoost: return "AB";
    case Method::kRandomForest: return "RF";
    case Method::kBagging: return "Bag";
  }
  return "?";
}

std::string render_table(std::span<const ExperimentReport> reports, TableFamily family,
                         const std::optional<std::string>& scheme) {
  if (reports.empty()) throw ConfigError("no reports to tabulate");
  for (const auto& r : reports)
    if (r.summaries.empty()) throw ConfigError("report for '" + r.dataset + "' has an empty scheme list");

  const auto& first = reports.front();
  std::vector<std::string> columns;
  if (scheme) {
    if (!label_in_family(*scheme, family))
      throw ConfigError("scheme " + *scheme + " does not belong to the " + to_string(family) + " table family");
    columns.push_back(*scheme);
  } else {
    for (const auto& s : first.summaries)
      if (label_in_family(s.label, family)) columns.push_back(s.label);
    if (columns.empty())
      throw ConfigError("reports contain no scheme for the " + to_string(family) + " table family");
    if (family != TableFamily::kPercentile) columns.resize(1);
  }
  for (const auto& r : reports)
    for (const auto& c : columns)
      if (!find_summary(r, c)) throw ConfigError("report for '" + r.dataset + "' lacks scheme " + c);

  const std::string base = base_label(first.method);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> note;
  if (family == TableFamily::kPercentile) {
    std::vector<std::string> head{"Data Set", base};
    head.insert(head.end(), columns.begin(), columns.end());
    rows.push_back(head);
    for (const auto& r : reports) {
      std::vector<std::string> row{r.dataset, num(r.mean_baseline_error)};
      for (const auto& c : columns) {
        const auto* s = find_summary(r, c);
        std::string mark = s->comparison.winner == Winner::kSecond  ? "*"
                           : s->comparison.winner == Winner::kFirst ? "-"
                                                                    : "";
        row.push_back(num(s->mean_test_error) + mark);
      }
      rows.push_back(row);
    }
    note.push_back(fmt::format("(*) significantly better / (-) significantly worse than {} at alpha = {:g} (paired t-test)",
                               base, first.alpha_level));
  } else {
    const bool improve = family == TableFamily::kMarginImprove;
    const auto& label = columns.front();
    rows.push_back({"Data Set", base, label, improve ? "Mean" : "Var", improve ? "Min" : "Range"});
    for (const auto& r : reports) {
      const auto* s = find_summary(r, label);
      const auto w = s->comparison.winner;
      std::vector<std::string> row{r.dataset, num(r.mean_baseline_error) + (w == Winner::kFirst ? "*" : ""),
                                   num(s->mean_test_error) + (w == Winner::kSecond ? "*" : "")};
      if (improve) {
        row.push_back(num(s->mean_improvement));
        row.push_back(num(s->min_improvement));
      } else {
        row.push_back(num(s->variance_reduction));
        row.push_back(num(s->range_reduction));
      }
      rows.push_back(row);
      if (s->infeasible > 0)
        note.push_back(fmt::format("{}: {} of {} simulations infeasible for {} (original weights kept)", r.dataset,
                                   s->infeasible, r.successful(), label));
    }
    note.insert(note.begin(),
                fmt::format("(*) significantly better at alpha = {:g} (paired t-test)", first.alpha_level));
  }
  std::string out = layout(rows);
  for (const auto& r : reports)
    note.push_back(fmt::format("{}: {} of {} simulations, T = {}, resampled: {}", r.dataset, r.successful(),
                               r.simulations, r.trees, r.resampling));
  for (const auto& n : note) out += n + '\n';
  return out;
}

std::string results_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream os;
  os << "dataset,method,simulation,seed,ok,baseline_error,ensemble_size,learner_hash,scheme,test_error,"
        "mean_improvement,min_improvement,variance_reduction,range_reduction,objective,feasible,error\n";
  for (const auto& r : reports) {
    for (const auto& rec : r.records) {
      auto prefix = fmt::format("{},{},{},{},{},{:.17g},{},{:016x}", r.dataset, to_string(r.method), rec.index,
                                rec.seed, rec.ok ? 1 : 0, rec.baseline_error, rec.ensemble_size, rec.learner_hash);
      if (!rec.ok) {
        std::string err = rec.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        os << prefix << ",,,,,,,,," << err << '\n';
        continue;
      }
      for (const auto& s : rec.schemes)
        os << prefix
           << fmt::format(",{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},\n", s.label, s.test_error,
                          s.mean_improvement, s.min_improvement, s.variance_reduction, s.range_reduction,
                          s.objective, s.feasible ? 1 : 0);
    }
  }
  return os.str();
}

void write_results_csv(std::span<const ExperimentReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << results_csv(reports);
}

std::vector<CmdSeries> cmd_series(const EnsembleModel& model, const Dataset& data,
                                  std::span<const std::size_t> checkpoints) {
  if (checkpoints.empty()) throw ConfigError("no CMD checkpoints requested");
  const auto H = prediction_matrix(model, data);
  std::vector<CmdSeries> out;
  for (std::size_t T : checkpoints) {
    if (T == 0 || T > model.size())
      throw ConfigError(fmt::format("CMD checkpoint T = {} outside 1..{}", T, model.size()));
    std::vector<double> w(model.size(), 0.0);
    std::copy_n(model.raw_weights.begin(), T, w.begin());
    w = normalize_weights(w);
    CmdSeries s;
    s.rounds = T;
    s.profile = compute_margins(H, w);
    s.points = cmd(s.profile);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::filesystem::path> export_cmd_series(const EnsembleModel& model, const Dataset& data,
                                                     std::span<const std::size_t> checkpoints,
                                                     const std::filesystem::path& prefix) {
  std::vector<std::filesystem::path> paths;
  for (const auto& s : cmd_series(model, data, checkpoints)) {
    auto p = prefix;
    p += fmt::format("_T{}.csv", s.rounds);
    write_cmd_series(s.points, p);
    paths.push_back(p);
  }
  return paths;
}

}  // namespace margin_forge
