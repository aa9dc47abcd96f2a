#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "margin_forge/ensemble.hpp"
#include "margin_forge/margins.hpp"
#include "margin_forge/simplex.hpp"

namespace margin_forge {

enum class Scheme { kUWS, kEWS, kPWS, kSM1, kSM2 };

/// Which post-hoc reweighting to run and its parameter.
struct RewSpec {
  Scheme scheme = Scheme::kUWS;
  int k = 5;          // EWS exponent
  double xi = 0.05;   // PWS / SM1 percentile level
  std::optional<double> target_mean;  // SM2 response; defaults to the original mean margin

  /// Accepts "uws", "ews[:k]", "pws[:xi]", "sm1[:xi]", "sm2[:mean]".
  static RewSpec parse(const std::string& text);
  /// Short column label, e.g. "UWS", "EWS5", "PWS.05", "SM1.05", "SM2".
  std::string label() const;
  void validate() const;
  bool is_mm() const { return scheme == Scheme::kUWS || scheme == Scheme::kEWS || scheme == Scheme::kPWS; }
};

struct RewResult {
  std::vector<double> weights;
  MarginProfile before;
  MarginProfile after;
  /// LP optimum (MM: sum r_i (new_i - old_i) in the caller's r; SM1: sum of
  /// margin changes) or the unnormalized SSE for SM2.
  double objective = 0.0;
  double variance_reduction = 0.0;
  double range_reduction = 0.0;
  MarginImprovement improvement;
  bool feasible = true;
  LpStatus lp_status = LpStatus::kOptimal;

  // SM2 only: least-squares coefficients before normalization and the SSE of
  // those coefficients and of the original weights around the target mean.
  std::vector<double> raw_coefficients;
  double sse_raw = 0.0;
  double sse_original = 0.0;
};

/// Ascending ranks (1 = smallest margin); ties keep observation order.
std::vector<std::size_t> margin_ranks(std::span<const double> margins);

std::vector<double> uws_r(std::size_t n);
/// r_i = ((n + 1) - rank_i)^k, so the smallest margin gets n^k.
std::vector<double> ews_r(std::span<const double> margins, int k);
/// Indicator of the ceil(n*xi) smallest margins.
std::vector<double> pws_r(std::span<const double> margins, double xi);

/// The MM linear program over w (T variables), exposed for dumps and oracles.
/// Objective is sum_t w_t sum_i r_i y_i h_it; the constant -sum_i r_i m_i is dropped.
LpProblem mm_problem(const PredictionMatrix& H, std::span<const double> old_margins, std::span<const double> r);
LpProblem sm1_problem(const PredictionMatrix& H, std::span<const double> old_margins, double xi);

/// How the MM and SM1 programs are handed to the simplex. kDual solves the
/// LP dual (T rows instead of n) and reads w off its constraint duals; kPrimal
/// solves the program exactly as mm_problem / sm1_problem state it.
enum class LpRoute { kDual, kPrimal };

RewResult mm_weights(const PredictionMatrix& H, std::span<const double> alpha, std::span<const double> r,
                     const SimplexOptions& options = {}, LpRoute route = LpRoute::kDual);
RewResult sm1_weights(const PredictionMatrix& H, std::span<const double> alpha, double xi,
                      const SimplexOptions& options = {}, LpRoute route = LpRoute::kDual);

/// Dual of max c.w s.t. rows . w >= rhs, sum w = 1, w >= 0:
///   max rhs.u - z  s.t.  z - sum_i u_i row_i[t] >= c_t,  u >= 0, z free.
LpProblem dual_problem(const LpProblem& primal);
RewResult sm2_weights(const PredictionMatrix& H, std::span<const double> alpha,
                      std::optional<double> target_mean = std::nullopt);

/// Dispatches on spec.scheme; alpha must be the model's normalized weights.
RewResult reweight(const PredictionMatrix& H, std::span<const double> alpha, const RewSpec& spec,
                   const SimplexOptions& options = {});

}  // namespace margin_forge
