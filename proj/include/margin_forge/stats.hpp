#pragma once

#include <span>

namespace margin_forge {

/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);
/// P(T <= t).
double student_t_cdf(double t, double df);

enum class Winner { kNone, kFirst, kSecond };

struct PairedTTest {
  double mean_diff = 0.0;  // mean of a_i - b_i
  double sd_diff = 0.0;    // sample standard deviation of the differences
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  /// Side with the smaller mean when p < alpha (lower test error wins).
  Winner winner = Winner::kNone;
};

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b, double alpha_level = 0.05);

}  // namespace margin_forge
