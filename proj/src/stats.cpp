#include "margin_forge/stats.hpp"

#include <cmath>
#include <limits>

#include "margin_forge/error.hpp"

namespace margin_forge {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ConfigError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("incomplete beta needs x in [0,1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ConfigError("degrees of freedom must be > 0");
  if (std::isnan(t)) throw ConfigError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b, double alpha_level) {
  if (a.size() != b.size()) throw DataError("paired t-test samples differ in length");
  if (a.size() < 2) throw DataError("paired t-test needs at least two pairs");
  const auto S = static_cast<double>(a.size());
  PairedTTest out;
  out.df = S - 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] - b[i];
  out.mean_diff = sum / S;
  double ss = 0.0;
  bool all_zero = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) all_zero = false;
    ss += (d - out.mean_diff) * (d - out.mean_diff);
  }
  out.sd_diff = std::sqrt(ss / out.df);
  if (all_zero) return out;
  if (out.sd_diff == 0.0) {
    out.t = std::copysign(std::numeric_limits<double>::infinity(), out.mean_diff);
    out.p = 0.0;
  } else {
    out.t = out.mean_diff * std::sqrt(S) / out.sd_diff;
    out.p = student_t_two_sided_p(out.t, out.df);
  }
  if (out.p < alpha_level) out.winner = out.mean_diff < 0.0 ? Winner::kFirst : Winner::kSecond;
  return out;
}

}  // namespace margin_forge
