#include "margin_forge/margins.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "margin_forge/error.hpp"
#include "margin_forge/kernels.hpp"

namespace margin_forge {

MarginProfile::MarginProfile(std::vector<double> margins, bool simplex_weights)
    : margins_(std::move(margins)), simplex_weights_(simplex_weights) {
  if (margins_.empty()) throw DataError("margin profile needs at least one margin");
  const auto n = static_cast<double>(margins_.size());
  double sum = 0.0, sq = 0.0;
  min_ = max_ = margins_.front();
  for (double m : margins_) {
    sum += m;
    sq += m * m;
    min_ = std::min(min_, m);
    max_ = std::max(max_, m);
  }
  mean_ = sum / n;
  second_moment_ = sq / n;
  double var = 0.0;
  for (double m : margins_) var += (m - mean_) * (m - mean_);
  variance_ = var / n;
}

double MarginProfile::percentile(double xi) const {
  if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("percentile level must lie in (0,1)");
  auto s = sorted();
  auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(s.size()) * xi - 1e-12));
  k = std::clamp<std::size_t>(k, 1, s.size());
  return s[k - 1];
}

std::vector<double> MarginProfile::sorted() const {
  std::vector<double> s(margins_);
  std::sort(s.begin(), s.end());
  return s;
}

bool in_simplex(std::span<const double> w, double tol) {
  double s = 0.0;
  for (double v : w) {
    if (v < -tol) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= tol;
}

MarginProfile compute_margins(const PredictionMatrix& H, std::span<const double> weights) {
  if (weights.size() != H.cols()) throw DataError("weight vector length does not match the number of learners");
  std::vector<double> m(H.rows());
  kernels::parallel::weighted_votes(H.entries(), H.cols(), H.labels(), weights, m);
  return MarginProfile(std::move(m), in_simplex(weights));
}

std::vector<CmdPoint> cmd(const MarginProfile& profile, std::span<const double> grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw ConfigError("CMD grid must be sorted ascending");
  auto s = profile.sorted();
  std::vector<CmdPoint> out;
  out.reserve(grid.size());
  for (double theta : grid) {
    auto count = std::upper_bound(s.begin(), s.end(), theta) - s.begin();
    out.push_back({theta, static_cast<double>(count) / static_cast<double>(s.size())});
  }
  return out;
}

std::vector<CmdPoint> cmd(const MarginProfile& profile) {
  auto s = profile.sorted();
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return cmd(profile, s);
}

MarginImprovement margin_improvement(const MarginProfile& before, const MarginProfile& after) {
  if (before.size() != after.size()) throw DataError("margin profiles differ in length");
  MarginImprovement out;
  out.deltas.resize(before.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    out.deltas[i] = after.margins()[i] - before.margins()[i];
    sum += out.deltas[i];
  }
  out.mean = sum / static_cast<double>(before.size());
  out.min = *std::min_element(out.deltas.begin(), out.deltas.end());
  return out;
}

void write_cmd_series(std::span<const CmdPoint> series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17) << "theta,fraction\n";
  for (const auto& p : series) out << p.theta << ',' << p.fraction << '\n';
}

}  // namespace margin_forge
