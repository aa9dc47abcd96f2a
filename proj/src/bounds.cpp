#include "margin_forge/bounds.hpp"

#include <cmath>
#include <limits>

#include "margin_forge/error.hpp"

namespace margin_forge {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BoundReport blank(BoundKind kind) {
  BoundReport r;
  r.kind = kind;
  r.value = r.value_squared = r.empirical_term = r.complexity_term = kNaN;
  r.theta = r.vc_dim = r.n = r.delta = r.theta0 = r.hspace = r.breiman_r = kNaN;
  r.gibbs_risk = r.disagreement = r.gibbs_risk_from_margins = r.disagreement_from_margins = kNaN;
  return r;
}

BoundReport refuse(BoundReport r, std::string why) {
  r.applicable = false;
  r.reason = std::move(why);
  return r;
}
}  // namespace

std::string to_string(BoundKind k) {
  switch (k) {
    case BoundKind::kSchapire: return "schapire";
    case BoundKind::kBreiman: return "breiman";
    case BoundKind::kGermain: return "germain";
  }
  return "unknown";
}

BoundReport schapire_terms(const MarginProfile& profile, double theta, double vc_dim, double n) {
  auto r = blank(BoundKind::kSchapire);
  r.theta = theta;
  r.vc_dim = vc_dim;
  r.n = n;
  if (!(theta > 0.0)) throw ConfigError("theta must be > 0");
  if (!(vc_dim > 0.0) || !(n > 0.0)) throw ConfigError("VC dimension and n must be > 0");
  if (!profile.simplex_weights()) return refuse(r, "margins come from non-simplex weights");
  std::size_t count = 0;
  for (double m : profile.margins())
    if (m <= theta) ++count;
  r.empirical_term = static_cast<double>(count) / static_cast<double>(profile.size());
  r.complexity_term = std::sqrt(vc_dim / (n * theta * theta));
  return r;
}

BoundReport breiman_bound(double theta0, double hspace, double n, double delta) {
  auto r = blank(BoundKind::kBreiman);
  r.theta0 = theta0;
  r.hspace = hspace;
  r.n = n;
  r.delta = delta;
  if (!(hspace >= 2.0)) return refuse(r, "|H| must be >= 2");
  if (!(n >= 1.0)) return refuse(r, "n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) return refuse(r, "delta must lie in (0,1)");
  if (!(theta0 > 4.0 * std::sqrt(2.0 / hspace))) return refuse(r, "theta0 <= 4 sqrt(2/|H|)");
  const double R = 32.0 / (n * theta0 * theta0) * std::log(2.0 * hspace);
  r.breiman_r = R;
  if (!(R > 0.0) || R > 2.0 * n) return refuse(r, "R outside (0, 2n]");
  r.value = R * (1.0 + std::log(2.0 * n) + std::log(1.0 / R)) + std::log(hspace / delta) / n;
  r.reason = "R grouped as (32/(n theta0^2)) ln(2|H|)";
  return r;
}

BoundReport germain_bound(const PredictionMatrix& H, std::span<const double> weights) {
  auto r = blank(BoundKind::kGermain);
  if (weights.size() != H.cols()) throw DataError("weight vector length does not match the number of learners");
  r.n = static_cast<double>(H.rows());
  if (!in_simplex(weights, 1e-9)) return refuse(r, "weights are not in the simplex");

  const std::size_t n = H.rows(), T = H.cols();
  double gibbs = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (H.at(i, t) != H.label(i)) ++wrong;
    gibbs += weights[t] * static_cast<double>(wrong) / static_cast<double>(n);
  }
  double dis = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u < T; ++u) {
      if (t == u) continue;
      std::size_t differ = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (H.at(i, t) != H.at(i, u)) ++differ;
      dis += weights[t] * weights[u] * static_cast<double>(differ) / static_cast<double>(n);
    }
  }
  const auto prof = compute_margins(H, weights);
  r.gibbs_risk = gibbs;
  r.disagreement = dis;
  r.gibbs_risk_from_margins = (1.0 - prof.mean()) / 2.0;
  r.disagreement_from_margins = (1.0 - prof.second_moment()) / 2.0;
  if (!(prof.mean() > 0.0)) return refuse(r, "mean margin <= 0");
  if (std::abs(1.0 - 2.0 * dis) <= 1e-12) return refuse(r, "disagreement at 1/2");
  r.value = 1.0 - (1.0 - 2.0 * gibbs) / (1.0 - 2.0 * dis);
  r.value_squared = 1.0 - (1.0 - 2.0 * gibbs) * (1.0 - 2.0 * gibbs) / (1.0 - 2.0 * dis);
  r.reason = "empirical plug-in";
  return r;
}

}  // namespace margin_forge
