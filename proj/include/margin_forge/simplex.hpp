#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace margin_forge {

struct LinearRow {
  std::vector<double> coeffs;
  double rhs = 0.0;
};

/// maximize objective . x
/// subject to  coeffs . x >= rhs   (inequalities)
///             coeffs . x == rhs   (equalities)
///             lower <= x <= upper
/// Empty `lower` means all zeros, empty `upper` means unbounded above; lower
/// bounds may be -infinity.
struct LpProblem {
  std::vector<double> objective;
  std::vector<LinearRow> inequalities;
  std::vector<LinearRow> equalities;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }
  void add_ge(std::vector<double> coeffs, double rhs) { inequalities.push_back({std::move(coeffs), rhs}); }
  /// Stored as (-coeffs) . x >= -rhs.
  void add_le(std::vector<double> coeffs, double rhs);
  void add_eq(std::vector<double> coeffs, double rhs) { equalities.push_back({std::move(coeffs), rhs}); }
  double lower_bound(std::size_t j) const { return lower.empty() ? 0.0 : lower[j]; }
  double upper_bound(std::size_t j) const {
    return upper.empty() ? std::numeric_limits<double>::infinity() : upper[j];
  }

  /// Throws ConfigError on non-finite coefficients or mismatched lengths.
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

std::string to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
  /// At the optimum: d objective / d rhs for each inequality (in stored >=
  /// form, so <= 0) followed by each equality.
  std::vector<double> duals;
};

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  /// Pivots smaller than this are a breakdown (NumericalError).
  double pivot_tol = 1e-11;
  /// Tableau entries at or below this magnitude are treated as zero when
  /// choosing pivots, so round-off never becomes a pivot element.
  double zero_tol = 1e-9;
  double optimality_tol = 1e-9;
  /// 0 picks a generous bound from the tableau size.
  std::size_t max_iterations = 0;
  /// Use the OpenMP pivot kernel (the serial one is the reference).
  bool parallel = false;
};

/// Dense two-phase tableau simplex with Bland's rule for both the entering and
/// the leaving variable. Infeasible and unbounded problems are reported through
/// the status; a breakdown (iteration cap, constraint residuals above tolerance
/// after optimality) throws NumericalError.
LpSolution solve(const LpProblem& problem, const SimplexOptions& options = {});

/// Max absolute constraint violation of x (inequalities, equalities, bounds).
double max_violation(const LpProblem& problem, const std::vector<double>& x);

/// Plain-text dump for cross-checking with external solvers:
///   vars V / max c... / ge rhs : a... / eq rhs : a... / lower ... / upper ...
void dump_problem(const LpProblem& problem, std::ostream& out);

}  // namespace margin_forge
