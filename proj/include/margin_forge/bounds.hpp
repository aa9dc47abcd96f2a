#pragma once

#include <span>
#include <string>

#include "margin_forge/ensemble.hpp"
#include "margin_forge/margins.hpp"

namespace margin_forge {

enum class BoundKind { kSchapire, kBreiman, kGermain };

std::string to_string(BoundKind k);

/// One bound evaluation with its inputs echoed back. Fields that do not apply
/// to a bound stay NaN.
struct BoundReport {
  BoundKind kind = BoundKind::kSchapire;
  bool applicable = true;
  std::string reason;

  double value = 0.0;              // Breiman / Germain bound value
  double value_squared = 0.0;      // Germain: 1 - (1 - 2R)^2 / (1 - 2 d_Q), reported alongside
  double empirical_term = 0.0;     // Schapire: fraction of margins <= theta
  double complexity_term = 0.0;    // Schapire: sqrt(d / (n theta^2)), constant-free

  double theta = 0.0;
  double vc_dim = 0.0;
  double n = 0.0;
  double delta = 0.0;
  double theta0 = 0.0;
  double hspace = 0.0;
  double breiman_r = 0.0;
  double gibbs_risk = 0.0;
  double disagreement = 0.0;
  /// Gibbs risk and disagreement via the margin-moment identities, for cross-checks.
  double gibbs_risk_from_margins = 0.0;
  double disagreement_from_margins = 0.0;
};

BoundReport schapire_terms(const MarginProfile& profile, double theta, double vc_dim, double n);

/// R = (32 / (n theta0^2)) ln(2|H|); value = R (1 + ln 2n + ln(1/R)) + ln(|H|/delta) / n.
/// Not applicable unless theta0 > 4 sqrt(2/|H|) and 0 < R <= 2n.
BoundReport breiman_bound(double theta0, double hspace, double n, double delta);

/// Plug-in value 1 - (1 - 2R)/(1 - 2 d_Q) with R the weighted learner error and
/// d_Q the weighted pairwise disagreement, both computed by direct sums over H.
BoundReport germain_bound(const PredictionMatrix& H, std::span<const double> weights);

}  // namespace margin_forge
