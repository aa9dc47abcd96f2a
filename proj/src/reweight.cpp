#include "margin_forge/reweight.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "margin_forge/error.hpp"

namespace margin_forge {

RewSpec RewSpec::parse(const std::string& text) {
  RewSpec spec;
  auto colon = text.find(':');
  std::string name = text.substr(0, colon);
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  std::optional<std::string> arg;
  if (colon != std::string::npos) arg = text.substr(colon + 1);

  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw ConfigError("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad scheme parameter in '" + text + "'");
    }
  };

  if (name == "uws") {
    spec.scheme = Scheme::kUWS;
    if (arg) throw ConfigError("uws takes no parameter");
  } else if (name == "ews") {
    spec.scheme = Scheme::kEWS;
    if (arg) {
      double k = number(*arg);
      if (k != std::floor(k)) throw ConfigError("ews exponent must be an integer");
      spec.k = static_cast<int>(k);
    }
  } else if (name == "pws" || name == "sm1") {
    spec.scheme = name == "pws" ? Scheme::kPWS : Scheme::kSM1;
    if (arg) spec.xi = number(*arg);
  } else if (name == "sm2") {
    spec.scheme = Scheme::kSM2;
    if (arg) spec.target_mean = number(*arg);
  } else {
    throw ConfigError("unknown reweighting scheme '" + text + "'");
  }
  spec.validate();
  return spec;
}

void RewSpec::validate() const {
  if (scheme == Scheme::kEWS && k < 1) throw ConfigError("ews exponent must be >= 1");
  if ((scheme == Scheme::kPWS || scheme == Scheme::kSM1) && !(xi > 0.0 && xi < 1.0))
    throw ConfigError("percentile level xi must lie in (0,1)");
  if (target_mean && !std::isfinite(*target_mean)) throw ConfigError("sm2 target mean must be finite");
}

std::string RewSpec::label() const {
  auto level = [](double v) {
    auto s = fmt::format("{:.2f}", v);
    return s.front() == '0' ? s.substr(1) : s;
  };
  switch (scheme) {
    case Scheme::kUWS: return "UWS";
    case Scheme::kEWS: return fmt::format("EWS{}", k);
    case Scheme::kPWS: return "PWS" + level(xi);
    case Scheme::kSM1: return "SM1" + level(xi);
    case Scheme::kSM2: return target_mean ? fmt::format("SM2({:g})", *target_mean) : "SM2";
  }
  return "?";
}

std::vector<std::size_t> margin_ranks(std::span<const double> margins) {
  std::vector<std::size_t> order(margins.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return margins[a] < margins[b]; });
  std::vector<std::size_t> rank(margins.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
  return rank;
}

std::vector<double> uws_r(std::size_t n) { return std::vector<double>(n, 1.0); }

std::vector<double> ews_r(std::span<const double> margins, int k) {
  if (k < 1) throw ConfigError("ews exponent must be >= 1");
  const auto rank = margin_ranks(margins);
  const double n = static_cast<double>(margins.size());
  std::vector<double> r(margins.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::pow(n + 1.0 - static_cast<double>(rank[i]), k);
  return r;
}

std::vector<double> pws_r(std::span<const double> margins, double xi) {
  if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("percentile level xi must lie in (0,1)");
  const auto rank = margin_ranks(margins);
  const auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(margins.size()) * xi - 1e-12));
  std::vector<double> r(margins.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rank[i] <= k ? 1.0 : 0.0;
  return r;
}

namespace {

std::vector<double> margin_row(const PredictionMatrix& H, std::size_t i) {
  std::vector<double> row(H.cols());
  const double y = H.label(i);
  for (std::size_t t = 0; t < H.cols(); ++t) row[t] = y * H.at(i, t);
  return row;
}

LpProblem simplex_problem(std::size_t T) {
  LpProblem lp;
  lp.objective.assign(T, 0.0);
  lp.add_eq(std::vector<double>(T, 1.0), 1.0);
  return lp;
}

void check_alpha(const PredictionMatrix& H, std::span<const double> alpha) {
  if (alpha.size() != H.cols()) throw DataError("alpha length does not match the number of learners");
  if (!in_simplex(alpha, 1e-9)) throw DataError("original weights must lie in the simplex");
}

void finish(RewResult& res, const PredictionMatrix& H) {
  res.after = compute_margins(H, res.weights);
  res.improvement = margin_improvement(res.before, res.after);
  res.variance_reduction = res.before.variance() - res.after.variance();
  res.range_reduction = res.before.range() - res.after.range();
}

// Clamp solver round-off so weights stay exactly nonnegative and sum to 1.
std::vector<double> clean_simplex(std::vector<double> w) {
  for (double& v : w) v = v > 0.0 ? v : 0.0;  // also drops -0
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
  return w;
}

struct LpOutcome {
  LpStatus status = LpStatus::kOptimal;
  std::vector<double> w;
  double objective = 0.0;
};

LpOutcome solve_simplex_program(const LpProblem& primal, const SimplexOptions& options, LpRoute route) {
  LpOutcome out;
  if (route == LpRoute::kPrimal) {
    auto sol = solve(primal, options);
    out.status = sol.status;
    out.w = std::move(sol.x);
    out.objective = sol.objective;
    return out;
  }
  // The dual is always feasible (large z), so an unbounded dual means an
  // infeasible primal.
  const auto sol = solve(dual_problem(primal), options);
  if (sol.status == LpStatus::kUnbounded || sol.status == LpStatus::kInfeasible) {
    out.status = LpStatus::kInfeasible;
    return out;
  }
  const std::size_t T = primal.num_vars();
  out.w.resize(T);
  for (std::size_t t = 0; t < T; ++t) out.w[t] = std::max(-sol.duals[t], 0.0);
  const double s = std::accumulate(out.w.begin(), out.w.end(), 0.0);
  if (!(s > 0.0)) throw NumericalError("dual multipliers do not form a weight vector");
  for (double& v : out.w) v /= s;
  const double viol = max_violation(primal, out.w);
  if (viol > options.feasibility_tol) {
    // Round-off in the multipliers; fall back to the program as stated.
    return solve_simplex_program(primal, options, LpRoute::kPrimal);
  }
  out.objective = 0.0;
  for (std::size_t t = 0; t < T; ++t) out.objective += primal.objective[t] * out.w[t];
  return out;
}

}  // namespace

LpProblem dual_problem(const LpProblem& primal) {
  const std::size_t T = primal.num_vars();
  const std::size_t n = primal.inequalities.size();
  if (primal.equalities.size() != 1 || !primal.lower.empty() || !primal.upper.empty())
    throw ConfigError("dual_problem expects a program over the probability simplex");
  for (double c : primal.equalities.front().coeffs)
    if (c != 1.0) throw ConfigError("dual_problem expects a program over the probability simplex");
  if (primal.equalities.front().rhs != 1.0) throw ConfigError("dual_problem expects sum w = 1");

  LpProblem dual;
  dual.objective.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) dual.objective[i] = primal.inequalities[i].rhs;
  dual.objective[n] = -1.0;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> row(n + 1);
    for (std::size_t i = 0; i < n; ++i) row[i] = -primal.inequalities[i].coeffs[t];
    row[n] = 1.0;
    dual.add_ge(std::move(row), primal.objective[t]);
  }
  dual.lower.assign(n + 1, 0.0);
  dual.lower[n] = -std::numeric_limits<double>::infinity();
  return dual;
}

LpProblem mm_problem(const PredictionMatrix& H, std::span<const double> old_margins, std::span<const double> r) {
  if (old_margins.size() != H.rows() || r.size() != H.rows()) throw DataError("MM inputs differ in length");
  LpProblem lp = simplex_problem(H.cols());
  for (std::size_t i = 0; i < H.rows(); ++i) {
    auto row = margin_row(H, i);
    for (std::size_t t = 0; t < H.cols(); ++t) lp.objective[t] += r[i] * row[t];
    lp.add_ge(std::move(row), old_margins[i]);
  }
  return lp;
}

LpProblem sm1_problem(const PredictionMatrix& H, std::span<const double> old_margins, double xi) {
  if (old_margins.size() != H.rows()) throw DataError("SM1 inputs differ in length");
  MarginProfile prof(std::vector<double>(old_margins.begin(), old_margins.end()));
  const double mean = prof.mean();
  const double theta = prof.percentile(xi);
  LpProblem lp = simplex_problem(H.cols());
  for (std::size_t i = 0; i < H.rows(); ++i) {
    auto row = margin_row(H, i);
    for (std::size_t t = 0; t < H.cols(); ++t) lp.objective[t] += row[t];
    lp.add_ge(std::move(row), old_margins[i] <= mean ? theta : mean);
  }
  return lp;
}

RewResult mm_weights(const PredictionMatrix& H, std::span<const double> alpha, std::span<const double> r,
                     const SimplexOptions& options, LpRoute route) {
  check_alpha(H, alpha);
  if (r.size() != H.rows()) throw DataError("r length does not match rows");
  double rmax = 0.0;
  for (double v : r) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("r must be finite and nonnegative");
    rmax = std::max(rmax, v);
  }
  if (rmax == 0.0) throw DataError("r must not be all zero");

  RewResult res;
  res.before = compute_margins(H, alpha);
  // Positive rescaling leaves the argmax unchanged and keeps n^k weights tame.
  std::vector<double> scaled(r.begin(), r.end());
  for (double& v : scaled) v /= rmax;

  auto lp = mm_problem(H, res.before.margins(), scaled);
  auto sol = solve_simplex_program(lp, options, route);
  res.lp_status = sol.status;
  if (sol.status != LpStatus::kOptimal)
    throw NumericalError("MM program reported " + to_string(sol.status) + " although the original weights are feasible");
  res.weights = clean_simplex(std::move(sol.w));
  finish(res, H);
  double constant = 0.0;
  for (std::size_t i = 0; i < H.rows(); ++i) constant += scaled[i] * res.before.margins()[i];
  res.objective = (sol.objective - constant) * rmax;
  return res;
}

RewResult sm1_weights(const PredictionMatrix& H, std::span<const double> alpha, double xi,
                      const SimplexOptions& options, LpRoute route) {
  check_alpha(H, alpha);
  RewResult res;
  res.before = compute_margins(H, alpha);
  auto lp = sm1_problem(H, res.before.margins(), xi);
  auto sol = solve_simplex_program(lp, options, route);
  res.lp_status = sol.status;
  if (sol.status != LpStatus::kOptimal) {
    res.feasible = false;
    res.weights.assign(alpha.begin(), alpha.end());
    finish(res, H);
    return res;
  }
  res.weights = clean_simplex(std::move(sol.w));
  finish(res, H);
  res.objective = sol.objective - res.before.mean() * static_cast<double>(H.rows());
  return res;
}

RewResult sm2_weights(const PredictionMatrix& H, std::span<const double> alpha, std::optional<double> target_mean) {
  check_alpha(H, alpha);
  RewResult res;
  res.before = compute_margins(H, alpha);
  const double target = target_mean.value_or(res.before.mean());
  const auto n = static_cast<Eigen::Index>(H.rows());
  const auto T = static_cast<Eigen::Index>(H.cols());

  Eigen::MatrixXd X(n, T);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index t = 0; t < T; ++t)
      X(i, t) = H.label(static_cast<std::size_t>(i)) * H.at(static_cast<std::size_t>(i), static_cast<std::size_t>(t));
  const Eigen::VectorXd response = Eigen::VectorXd::Constant(n, target);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  const Eigen::VectorXd b = cod.solve(response);

  res.raw_coefficients.assign(b.data(), b.data() + b.size());
  res.sse_raw = (X * b - response).squaredNorm();
  const Eigen::Map<const Eigen::VectorXd> a(alpha.data(), T);
  res.sse_original = (X * a - response).squaredNorm();
  res.objective = res.sse_raw;

  const double sum = b.sum();
  if (std::abs(sum) <= 1e-9) throw NumericalError("non-normalizable solution: SM2 coefficients sum to ~0");
  res.weights.resize(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) res.weights[static_cast<std::size_t>(t)] = b(t) / sum;
  finish(res, H);
  return res;
}

RewResult reweight(const PredictionMatrix& H, std::span<const double> alpha, const RewSpec& spec,
                   const SimplexOptions& options) {
  spec.validate();
  switch (spec.scheme) {
    case Scheme::kUWS: return mm_weights(H, alpha, uws_r(H.rows()), options);
    case Scheme::kEWS:
    case Scheme::kPWS: {
      const auto before = compute_margins(H, alpha);
      const auto r = spec.scheme == Scheme::kEWS ? ews_r(before.margins(), spec.k) : pws_r(before.margins(), spec.xi);
      return mm_weights(H, alpha, r, options);
    }
    case Scheme::kSM1: return sm1_weights(H, alpha, spec.xi, options);
    case Scheme::kSM2: return sm2_weights(H, alpha, spec.target_mean);
  }
  throw ConfigError("unknown scheme");
}

}  // namespace margin_forge
