#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "margin_forge/ensemble.hpp"
#include "margin_forge/experiment.hpp"
#include "margin_forge/margins.hpp"

namespace margin_forge {

/// Layouts of the comparison tables.
///  kMarginImprove: Data Set | base | scheme | Mean | Min   (MM schemes)
///  kPercentile:    Data Set | base | PWS columns...         (PWS schemes only)
///  kReduction:     Data Set | base | scheme | Var | Range   (SM1 / SM2)
enum class TableFamily { kMarginImprove, kPercentile, kReduction };

std::string to_string(TableFamily f);
TableFamily table_family_from_string(const std::string& s);
/// The family a scheme's results are normally shown in.
TableFamily default_family(const RewSpec& spec);

/// Short base-ensemble column label: "AB", "RF" or "Bag".
std::string base_label(Method m);

/// Plain-text table, one row per report. Marks follow the family: in the
/// margin-improve and reduction tables `*` goes on whichever side the paired
/// t-test finds significantly better; in the percentile table `*`/`-` mark a
/// scheme significantly better/worse than the base. `scheme` picks the column
/// (defaults to the first matching scheme). Throws ConfigError on an empty
/// scheme list or when the reports hold no scheme of the requested family.
std::string render_table(std::span<const ExperimentReport> reports, TableFamily family,
                         const std::optional<std::string>& scheme = std::nullopt);

/// One row per (dataset, simulation, scheme) with a header row.
void write_results_csv(std::span<const ExperimentReport> reports, const std::filesystem::path& path);
std::string results_csv(std::span<const ExperimentReport> reports);

struct CmdSeries {
  std::size_t rounds = 0;
  MarginProfile profile;
  std::vector<CmdPoint> points;
};

/// Training-margin CMDs of the first T learners for each checkpoint T, with
/// the prefix's raw weights renormalized. Throws ConfigError for T = 0 or T
/// beyond the model size.
std::vector<CmdSeries> cmd_series(const EnsembleModel& model, const Dataset& data,
                                  std::span<const std::size_t> checkpoints);

/// Writes <prefix>_T<T>.csv per checkpoint and returns the paths.
std::vector<std::filesystem::path> export_cmd_series(const EnsembleModel& model, const Dataset& data,
                                                     std::span<const std::size_t> checkpoints,
                                                     const std::filesystem::path& prefix);

}  // namespace margin_forge
