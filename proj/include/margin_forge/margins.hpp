#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "margin_forge/ensemble.hpp"

namespace margin_forge {

/// Margin vector m_i = y_i sum_t w_t h_it with its summary statistics.
class MarginProfile {
 public:
  MarginProfile() = default;
  /// simplex_weights records whether the producing weights were nonnegative and
  /// summed to 1; simplex-only bounds refuse profiles without it.
  explicit MarginProfile(std::vector<double> margins, bool simplex_weights = true);

  std::span<const double> margins() const { return margins_; }
  std::size_t size() const { return margins_.size(); }
  double mean() const { return mean_; }
  /// Population variance (divide by n).
  double variance() const { return variance_; }
  double second_moment() const { return second_moment_; }
  double min() const { return min_; }
  double max() const { return max_; }
  double range() const { return max_ - min_; }
  bool simplex_weights() const { return simplex_weights_; }

  /// Lower empirical quantile: the ceil(n*xi)-th smallest margin, xi in (0,1).
  double percentile(double xi) const;
  /// Sorted copy of the margins.
  std::vector<double> sorted() const;

 private:
  std::vector<double> margins_;
  double mean_ = 0.0;
  double variance_ = 0.0;
  double second_moment_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
  bool simplex_weights_ = true;
};

bool in_simplex(std::span<const double> w, double tol = 1e-9);

MarginProfile compute_margins(const PredictionMatrix& H, std::span<const double> weights);

struct CmdPoint {
  double theta;
  double fraction;
};

/// Fraction of margins <= theta for each grid value. Grid must be sorted ascending.
std::vector<CmdPoint> cmd(const MarginProfile& profile, std::span<const double> grid);
/// CMD evaluated at the sorted unique margin values.
std::vector<CmdPoint> cmd(const MarginProfile& profile);

struct MarginImprovement {
  double mean = 0.0;
  double min = 0.0;
  std::vector<double> deltas;
};

MarginImprovement margin_improvement(const MarginProfile& before, const MarginProfile& after);

/// Two-column "theta,fraction" series with a header row.
void write_cmd_series(std::span<const CmdPoint> series, const std::filesystem::path& path);

}  // namespace margin_forge
