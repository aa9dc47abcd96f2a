#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code under test except for plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "margin_forge/dataset.hpp"
#include "margin_forge/ensemble.hpp"
#include "margin_forge/simplex.hpp"

namespace oracle {

// ---------------------------------------------------------------- LP oracle

struct LpAnswer {
  margin_forge::LpStatus status;
  double objective = 0.0;
};

// Every constraint as a . x >= b (equalities are flagged and forced active).
struct Halfspace {
  std::vector<double> a;
  double b;
  bool eq;
};

inline std::vector<Halfspace> halfspaces(const margin_forge::LpProblem& p) {
  std::vector<Halfspace> hs;
  const std::size_t V = p.num_vars();
  for (const auto& r : p.inequalities) hs.push_back({r.coeffs, r.rhs, false});
  for (const auto& r : p.equalities) hs.push_back({r.coeffs, r.rhs, true});
  for (std::size_t j = 0; j < V; ++j) {
    std::vector<double> e(V, 0.0);
    e[j] = 1.0;
    const double lo = p.lower_bound(j), hi = p.upper_bound(j);
    if (std::isfinite(lo)) hs.push_back({e, lo, false});
    if (std::isfinite(hi)) {
      for (double& v : e) v = -v;
      hs.push_back({e, -hi, false});
    }
  }
  return hs;
}

// Max of c.x over the vertices of {x : hs}, or nullopt when there is none.
// Enumerates every V-subset of the constraints; a vertex is any feasible point
// where V linearly independent constraints are tight. Equalities need not be
// in the subset (they may be redundant, e.g. 0 . x = 0) but must hold.
inline std::optional<double> best_vertex(const std::vector<Halfspace>& hs, const std::vector<double>& c,
                                         double tol = 1e-9) {
  const std::size_t V = c.size();
  const std::size_t m = hs.size();
  std::optional<double> best;
  std::vector<std::size_t> pick(V);
  std::vector<int> mask(m, 0);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(std::min(V, m)), 1);
  if (m < V) return best;
  // Iterate over combinations via prev_permutation on a 1..10..0 mask.
  do {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(V), static_cast<Eigen::Index>(V));
    Eigen::VectorXd b(static_cast<Eigen::Index>(V));
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (!mask[k]) continue;
      for (std::size_t j = 0; j < V; ++j) A(row, static_cast<Eigen::Index>(j)) = hs[k].a[j];
      b(row) = hs[k].b;
      ++row;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < static_cast<Eigen::Index>(V)) continue;
    const Eigen::VectorXd x = lu.solve(b);
    bool feasible = true;
    for (const auto& h : hs) {
      double s = 0.0;
      for (std::size_t j = 0; j < V; ++j) s += h.a[j] * x(static_cast<Eigen::Index>(j));
      const double scale = 1.0 + std::abs(h.b);
      if (h.eq ? std::abs(s - h.b) > tol * scale : s < h.b - tol * scale) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t j = 0; j < V; ++j) obj += c[j] * x(static_cast<Eigen::Index>(j));
    if (!best || obj > *best) best = obj;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

// Brute-force answer for LPs whose feasible set (if any) is pointed, e.g. all
// variables bounded below. Unboundedness is decided on the recession cone
// {d : A d >= 0, E d = 0, bound rows >= 0} intersected with the box |d| <= 1.
inline LpAnswer solve_by_vertices(const margin_forge::LpProblem& p) {
  const auto hs = halfspaces(p);
  const auto best = best_vertex(hs, p.objective);
  if (!best) return {margin_forge::LpStatus::kInfeasible, 0.0};
  std::vector<Halfspace> cone;
  for (const auto& h : hs) cone.push_back({h.a, 0.0, h.eq});
  const std::size_t V = p.num_vars();
  for (std::size_t j = 0; j < V; ++j) {
    std::vector<double> e(V, 0.0);
    e[j] = 1.0;
    cone.push_back({e, -1.0, false});
    e[j] = -1.0;
    cone.push_back({e, -1.0, false});
  }
  const auto ray = best_vertex(cone, p.objective);
  if (ray && *ray > 1e-9) return {margin_forge::LpStatus::kUnbounded, 0.0};
  return {margin_forge::LpStatus::kOptimal, *best};
}

// Random small LP with nonnegative variables; a mix of >=, <= and = rows and
// occasionally an upper bound. Roughly a third come out infeasible or unbounded.
inline margin_forge::LpProblem random_lp(std::mt19937_64& rng, std::size_t max_vars = 4, std::size_t max_rows = 8) {
  std::uniform_int_distribution<std::size_t> nv(1, max_vars), nr(1, max_rows);
  std::uniform_int_distribution<int> coef(-5, 5), kind(0, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  margin_forge::LpProblem p;
  const std::size_t V = nv(rng), R = nr(rng);
  for (std::size_t j = 0; j < V; ++j) p.objective.push_back(coef(rng));
  for (std::size_t r = 0; r < R; ++r) {
    std::vector<double> a(V);
    for (double& v : a) v = coef(rng);
    const double b = coef(rng);
    const int k = kind(rng);
    if (k < 4) p.add_le(a, std::abs(b) + 1.0);
    else if (k < 8) p.add_ge(a, b);
    else if (k < 9 && p.equalities.empty()) p.add_eq(a, b);
    else p.add_le(a, b);
  }
  if (u(rng) < 0.3) {
    p.upper.assign(V, std::numeric_limits<double>::infinity());
    p.upper[0] = 1.0 + std::floor(u(rng) * 4.0);
  }
  return p;
}

// ------------------------------------------------------ simplex grid oracle

// Max of f(w) over the 2-simplex grid with step 1/steps, subject to g(w) >= 0
// for every constraint; nullopt when no grid point is feasible.
template <class Objective, class Feasible>
std::optional<std::pair<double, std::vector<double>>> grid_search(Objective f, Feasible ok, int steps = 1000) {
  std::optional<std::pair<double, std::vector<double>>> best;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      std::vector<double> w{static_cast<double>(i) / steps, static_cast<double>(j) / steps,
                            static_cast<double>(steps - i - j) / steps};
      if (!ok(w)) continue;
      const double v = f(w);
      if (!best || v > best->first) best = std::make_pair(v, w);
    }
  }
  return best;
}

// ---------------------------------------------------------------- CART oracle

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = -1.0;
};

inline double gini_mass(double pos, double neg) {
  const double w = pos + neg;
  return w > 0.0 ? 2.0 * pos * neg / w : 0.0;
}

// Exhaustive best stump: every feature, every midpoint between consecutive
// distinct values among positive-weight rows; ties to lowest feature, then
// lowest threshold.
inline Stump best_stump(const margin_forge::Dataset& d, const std::vector<double>& w) {
  Stump best;
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < d.rows(); ++i) (d.label(i) > 0 ? pos : neg) += w[i];
  const double parent = gini_mass(pos, neg);
  for (std::size_t j = 0; j < d.cols(); ++j) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < d.rows(); ++i)
      if (w[i] > 0.0) vals.push_back(d.at(i, j));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double thr = 0.5 * (vals[k] + vals[k + 1]);
      double lp = 0.0, ln = 0.0, rp = 0.0, rn = 0.0;
      for (std::size_t i = 0; i < d.rows(); ++i) {
        const bool left = d.at(i, j) <= thr;
        if (d.label(i) > 0) (left ? lp : rp) += w[i];
        else (left ? ln : rn) += w[i];
      }
      const double gain = parent - gini_mass(lp, ln) - gini_mass(rp, rn);
      if (gain > best.gain + 1e-12) best = {j, thr, gain};
    }
  }
  return best;
}

// ------------------------------------------------------------ margin oracles

inline std::vector<double> margins(const margin_forge::PredictionMatrix& H, const std::vector<double>& w) {
  std::vector<double> m(H.rows(), 0.0);
  for (std::size_t i = 0; i < H.rows(); ++i) {
    for (std::size_t t = 0; t < H.cols(); ++t) m[i] += w[t] * H.at(i, t);
    m[i] *= H.label(i);
  }
  return m;
}

// Gibbs risk and disagreement written per row: for each row, the chance a
// random voter errs and the chance two independent voters differ.
inline std::pair<double, double> gibbs_and_disagreement(const margin_forge::PredictionMatrix& H,
                                                        const std::vector<double>& w) {
  double R = 0.0, dQ = 0.0;
  const double n = static_cast<double>(H.rows());
  for (std::size_t i = 0; i < H.rows(); ++i) {
    double err = 0.0, differ = 0.0;
    for (std::size_t t = 0; t < H.cols(); ++t) {
      if (H.at(i, t) != H.label(i)) err += w[t];
      for (std::size_t u = 0; u < H.cols(); ++u)
        if (H.at(i, t) != H.at(i, u)) differ += w[t] * w[u];
    }
    R += err / n;
    dQ += differ / n;
  }
  return {R, dQ};
}

// ---------------------------------------------------------------- t oracle

// P(|T| >= |t|) by integrating the Student t density over [|t|, inf).
inline double t_two_sided_p(double t, double df) {
  using boost::math::lgamma;
  const double logc = lgamma((df + 1.0) / 2.0) - lgamma(df / 2.0) - 0.5 * std::log(df * M_PI);
  auto density = [&](double x) { return std::exp(logc - (df + 1.0) / 2.0 * std::log1p(x * x / df)); };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double a = std::abs(t);
  const double tail = integrator.integrate([&](double s) { return density(a + s); }, 0.0,
                                           std::numeric_limits<double>::infinity());
  return std::min(1.0, 2.0 * tail);
}

}  // namespace oracle
