#include "margin_forge/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "margin_forge/error.hpp"
#include "margin_forge/kernels.hpp"

namespace margin_forge {

void LpProblem::add_le(std::vector<double> coeffs, double rhs) {
  for (double& c : coeffs) c = -c;
  inequalities.push_back({std::move(coeffs), -rhs});
}

void LpProblem::validate() const {
  const std::size_t v = num_vars();
  if (v == 0) throw ConfigError("LP needs at least one variable");
  for (double c : objective)
    if (!std::isfinite(c)) throw ConfigError("LP objective must be finite");
  auto check_rows = [&](const std::vector<LinearRow>& rows) {
    for (const auto& r : rows) {
      if (r.coeffs.size() != v) throw ConfigError("LP row length differs from variable count");
      if (!std::isfinite(r.rhs)) throw ConfigError("LP right-hand side must be finite");
      for (double c : r.coeffs)
        if (!std::isfinite(c)) throw ConfigError("LP coefficients must be finite");
    }
  };
  check_rows(inequalities);
  check_rows(equalities);
  if (!lower.empty() && lower.size() != v) throw ConfigError("LP lower bound length mismatch");
  if (!upper.empty() && upper.size() != v) throw ConfigError("LP upper bound length mismatch");
  for (std::size_t j = 0; j < v; ++j) {
    const double lo = lower_bound(j), hi = upper_bound(j);
    if (std::isnan(lo) || std::isnan(hi) || lo == std::numeric_limits<double>::infinity() ||
        hi == -std::numeric_limits<double>::infinity())
      throw ConfigError("LP bounds invalid");
  }
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

double max_violation(const LpProblem& problem, const std::vector<double>& x) {
  double worst = 0.0;
  auto dot = [&](const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * x[j];
    return s;
  };
  for (const auto& r : problem.inequalities) worst = std::max(worst, r.rhs - dot(r.coeffs));
  for (const auto& r : problem.equalities) worst = std::max(worst, std::abs(r.rhs - dot(r.coeffs)));
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    worst = std::max(worst, problem.lower_bound(j) - x[j]);
    worst = std::max(worst, x[j] - problem.upper_bound(j));
  }
  return worst;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x_j = offset_j + sum over its columns of sign * x'_col, every x' >= 0.
struct VarMap {
  struct Part {
    std::size_t column;
    double sign;
  };
  std::vector<std::vector<Part>> parts;
  std::vector<double> offset;
  std::size_t columns = 0;
};

struct Tableau {
  std::size_t rows = 0;  // constraint rows; row 0 of `data` is the objective
  std::size_t cols = 0;  // including the rhs column
  std::vector<double> data;
  std::vector<std::size_t> basis;  // basis[r] for constraint row r (1-based in data)

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double rhs(std::size_t r) const { return at(r, cols - 1); }
};

class Solver {
 public:
  Solver(const LpProblem& p, const SimplexOptions& o) : prob_(p), opt_(o) {}

  LpSolution run() {
    prob_.validate();
    build_var_map();
    build_tableau();

    LpSolution sol;
    if (num_art_ > 0) {
      set_objective_phase1();
      auto st = iterate(sol.iterations, true);
      if (st == LpStatus::kUnbounded) throw NumericalError("simplex phase 1 reported unbounded");
      if (tab_.rhs(0) > opt_.feasibility_tol) {
        sol.status = LpStatus::kInfeasible;
        return sol;
      }
      drive_out_artificials();
    }
    set_objective_phase2();
    auto st = iterate(sol.iterations);
    if (st == LpStatus::kUnbounded) {
      sol.status = LpStatus::kUnbounded;
      return sol;
    }
    sol.status = LpStatus::kOptimal;
    sol.x = extract();
    sol.duals = duals();
    sol.objective = 0.0;
    for (std::size_t j = 0; j < prob_.num_vars(); ++j) sol.objective += prob_.objective[j] * sol.x[j];
    const double viol = max_violation(prob_, sol.x);
    if (viol > opt_.feasibility_tol)
      throw NumericalError("simplex solution violates constraints by " + std::to_string(viol));
    return sol;
  }

 private:
  void build_var_map() {
    const std::size_t v = prob_.num_vars();
    vm_.parts.resize(v);
    vm_.offset.assign(v, 0.0);
    for (std::size_t j = 0; j < v; ++j) {
      const double lo = prob_.lower_bound(j), hi = prob_.upper_bound(j);
      if (std::isfinite(lo)) {
        vm_.offset[j] = lo;
        vm_.parts[j].push_back({vm_.columns++, 1.0});
        if (std::isfinite(hi)) bound_rows_.push_back({j, hi - lo});
      } else if (std::isfinite(hi)) {
        vm_.offset[j] = hi;
        vm_.parts[j].push_back({vm_.columns++, -1.0});
      } else {
        vm_.parts[j].push_back({vm_.columns++, 1.0});
        vm_.parts[j].push_back({vm_.columns++, -1.0});
      }
    }
  }

  // Rows in x'-space: (coeffs over structural columns, rhs, is_equality).
  struct RawRow {
    std::vector<double> a;
    double b;
    bool eq;
  };

  RawRow transform(const LinearRow& r, bool eq) const {
    RawRow out{std::vector<double>(vm_.columns, 0.0), r.rhs, eq};
    for (std::size_t j = 0; j < r.coeffs.size(); ++j) {
      out.b -= r.coeffs[j] * vm_.offset[j];
      for (auto part : vm_.parts[j]) out.a[part.column] += part.sign * r.coeffs[j];
    }
    return out;
  }

  void build_tableau() {
    std::vector<RawRow> raw;
    for (const auto& r : prob_.inequalities) raw.push_back(transform(r, false));
    for (auto [j, width] : bound_rows_) {
      RawRow row{std::vector<double>(vm_.columns, 0.0), -width, false};
      row.a[vm_.parts[j].front().column] = -1.0;
      raw.push_back(std::move(row));
    }
    for (const auto& r : prob_.equalities) raw.push_back(transform(r, true));

    const std::size_t m = raw.size();
    num_slack_ = 0;
    bool shifted = false;
    for (const auto& r : raw) {
      if (!r.eq) ++num_slack_;
      if (!r.eq && r.b > 0.0) shifted = true;
    }
    // Inequalities are stored as -a.x + s = -b with the slack basic. Rows with
    // b > 0 start infeasible and share one artificial column x0 (coefficient
    // -1); equalities get their own artificial each.
    num_art_ = shifted ? 1 : 0;
    for (const auto& r : raw)
      if (r.eq) ++num_art_;

    struc_ = vm_.columns;
    slack0_ = struc_;
    art0_ = slack0_ + num_slack_;
    tab_.rows = m;
    tab_.cols = art0_ + num_art_ + 1;
    tab_.data.assign((m + 1) * tab_.cols, 0.0);
    tab_.basis.assign(m + 1, 0);

    std::size_t s = 0, a = shifted ? 1 : 0;
    std::size_t worst_row = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& r = raw[i];
      const std::size_t row = i + 1;
      const double sign = r.eq ? (r.b < 0.0 ? -1.0 : 1.0) : -1.0;
      for (std::size_t c = 0; c < struc_; ++c) tab_.at(row, c) = sign * r.a[c];
      tab_.at(row, tab_.cols - 1) = sign * r.b;
      if (r.eq) {
        const std::size_t ac = art0_ + a++;
        eq_cols_.push_back({ac, sign});
        tab_.at(row, ac) = 1.0;
        tab_.basis[row] = ac;
        continue;
      }
      const std::size_t slack_col = slack0_ + s++;
      tab_.at(row, slack_col) = 1.0;
      tab_.basis[row] = slack_col;
      if (r.b > 0.0) {
        tab_.at(row, art0_) = -1.0;
        if (worst_row == 0 || tab_.rhs(row) < tab_.rhs(worst_row)) worst_row = row;
      }
    }
    // x0 enters at the most violated row, which makes every slack nonnegative.
    if (shifted) pivot(worst_row, art0_);
  }

  bool is_art(std::size_t c) const { return c >= art0_ && c < art0_ + num_art_; }

  void price_out(const std::vector<double>& cost) {
    const std::size_t cols = tab_.cols;
    for (std::size_t c = 0; c < cols; ++c) tab_.at(0, c) = c + 1 < cols ? cost[c] : 0.0;
    for (std::size_t r = 1; r <= tab_.rows; ++r) {
      const double cb = cost[tab_.basis[r]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < cols; ++c) tab_.at(0, c) -= cb * tab_.at(r, c);
    }
  }

  void set_objective_phase1() {
    std::vector<double> cost(tab_.cols - 1, 0.0);
    for (std::size_t c = art0_; c < art0_ + num_art_; ++c) cost[c] = -1.0;
    price_out(cost);
  }

  void set_objective_phase2() {
    std::vector<double> cost(tab_.cols - 1, 0.0);
    for (std::size_t j = 0; j < prob_.num_vars(); ++j)
      for (auto part : vm_.parts[j]) cost[part.column] += part.sign * prob_.objective[j];
    price_out(cost);
  }

  void pivot(std::size_t pr, std::size_t pc) {
    const std::size_t all_rows = tab_.rows + 1;
    if (opt_.parallel)
      kernels::parallel::pivot(tab_.data, all_rows, tab_.cols, pr, pc);
    else
      kernels::serial::pivot(tab_.data, all_rows, tab_.cols, pr, pc);
    tab_.basis[pr] = pc;
  }

  bool artificials_basic() const {
    for (std::size_t r = 1; r <= tab_.rows; ++r)
      if (is_art(tab_.basis[r])) return true;
    return false;
  }

  LpStatus iterate(std::size_t& iterations, bool phase1 = false) {
    const std::size_t cap =
        opt_.max_iterations ? opt_.max_iterations : 50 * (tab_.rows + tab_.cols) + 1000;
    const std::size_t last = tab_.cols - 1;
    for (;;) {
      // Phase 1 is done once the artificial sum is zero; degenerate pivots
      // past that point cannot change anything.
      if (phase1 && (!artificials_basic() || tab_.rhs(0) <= 1e-12)) return LpStatus::kOptimal;
      // Bland: lowest-index column with a positive reduced cost enters.
      // Artificials never re-enter once they have left the basis.
      std::size_t enter = last;
      for (std::size_t c = 0; c < last; ++c) {
        if (is_art(c)) continue;
        if (tab_.at(0, c) > opt_.optimality_tol) {
          enter = c;
          break;
        }
      }
      if (enter == last) return LpStatus::kOptimal;

      // Ratio test; ties go to the lowest basic variable index.
      std::size_t leave = 0;
      double best = kInf;
      for (std::size_t r = 1; r <= tab_.rows; ++r) {
        const double a = tab_.at(r, enter);
        if (a <= opt_.zero_tol) continue;
        const double ratio = std::max(tab_.rhs(r), 0.0) / a;
        const double tie = 1e-12 * (1.0 + std::abs(best));
        if (leave == 0 || ratio < best - tie || (ratio <= best + tie && tab_.basis[r] < tab_.basis[leave])) {
          if (leave == 0 || ratio < best - tie) best = ratio;
          leave = r;
        }
      }
      if (leave == 0) return LpStatus::kUnbounded;
      if (std::abs(tab_.at(leave, enter)) < opt_.pivot_tol) throw NumericalError("simplex pivot below tolerance");
      if (++iterations > cap) throw NumericalError("simplex iteration limit exceeded");
      pivot(leave, enter);
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 1; r <= tab_.rows;) {
      if (!is_art(tab_.basis[r])) {
        ++r;
        continue;
      }
      std::size_t col = tab_.cols - 1;
      double best = std::max(opt_.zero_tol, 1e-7);
      for (std::size_t c = 0; c < art0_; ++c) {
        if (std::abs(tab_.at(r, c)) > best) {
          best = std::abs(tab_.at(r, c));
          col = c;
        }
      }
      if (col != tab_.cols - 1) {
        pivot(r, col);
        ++r;
      } else {
        remove_row(r);  // redundant constraint
      }
    }
  }

  void remove_row(std::size_t r) {
    auto first = tab_.data.begin() + static_cast<std::ptrdiff_t>(r * tab_.cols);
    tab_.data.erase(first, first + static_cast<std::ptrdiff_t>(tab_.cols));
    tab_.basis.erase(tab_.basis.begin() + static_cast<std::ptrdiff_t>(r));
    --tab_.rows;
  }

  std::vector<double> duals() const {
    std::vector<double> d;
    for (std::size_t i = 0; i < prob_.inequalities.size(); ++i) d.push_back(tab_.at(0, slack0_ + i));
    for (auto [col, sign] : eq_cols_) d.push_back(-sign * tab_.at(0, col));
    return d;
  }

  std::vector<double> extract() const {
    std::vector<double> xp(vm_.columns, 0.0);
    for (std::size_t r = 1; r <= tab_.rows; ++r)
      if (tab_.basis[r] < struc_) xp[tab_.basis[r]] = std::max(tab_.rhs(r), 0.0);
    std::vector<double> x(prob_.num_vars());
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] = vm_.offset[j];
      for (auto part : vm_.parts[j]) x[j] += part.sign * xp[part.column];
    }
    return x;
  }

  const LpProblem& prob_;
  SimplexOptions opt_;
  VarMap vm_;
  std::vector<std::pair<std::size_t, double>> bound_rows_;
  std::vector<std::pair<std::size_t, double>> eq_cols_;  // artificial column and row sign per equality
  Tableau tab_;
  std::size_t struc_ = 0, slack0_ = 0, art0_ = 0, num_slack_ = 0, num_art_ = 0;
};

}  // namespace

LpSolution solve(const LpProblem& problem, const SimplexOptions& options) { return Solver(problem, options).run(); }

void dump_problem(const LpProblem& problem, std::ostream& out) {
  const auto prec = out.precision(17);
  auto write_vec = [&](const std::vector<double>& v) {
    for (double c : v) out << ' ' << c;
  };
  out << "vars " << problem.num_vars() << "\nmax";
  write_vec(problem.objective);
  out << '\n';
  for (const auto& r : problem.inequalities) {
    out << "ge " << r.rhs << " :";
    write_vec(r.coeffs);
    out << '\n';
  }
  for (const auto& r : problem.equalities) {
    out << "eq " << r.rhs << " :";
    write_vec(r.coeffs);
    out << '\n';
  }
  out << "lower";
  for (std::size_t j = 0; j < problem.num_vars(); ++j) out << ' ' << problem.lower_bound(j);
  out << "\nupper";
  for (std::size_t j = 0; j < problem.num_vars(); ++j) out << ' ' << problem.upper_bound(j);
  out << '\n';
  out.precision(prec);
}

}  // namespace margin_forge
