#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "margin_forge/error.hpp"
#include "margin_forge/stats.hpp"
#include "oracles.hpp"

using namespace margin_forge;

TEST_CASE("hand paired t-test") {
  std::vector<double> a{1, 2, 3}, b{0, 0, 0};
  auto r = paired_t_test(a, b);
  CHECK(r.mean_diff == doctest::Approx(2.0));
  CHECK(r.sd_diff == doctest::Approx(1.0));
  CHECK(r.t == doctest::Approx(2.0 * std::sqrt(3.0)));
  CHECK(r.df == 2.0);
  // With two degrees of freedom the tail has the closed form 1 - t/sqrt(t^2+2).
  CHECK(r.p == doctest::Approx(1.0 - r.t / std::sqrt(r.t * r.t + 2.0)).epsilon(1e-12));
  CHECK(r.winner == Winner::kNone);
  CHECK(paired_t_test(a, b, 0.1).winner == Winner::kSecond);

  auto same = paired_t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
  CHECK(same.winner == Winner::kNone);

  auto flip = paired_t_test(b, a, 0.1);
  CHECK(flip.t == doctest::Approx(-r.t));
  CHECK(flip.p == doctest::Approx(r.p));
  CHECK(flip.winner == Winner::kFirst);

  std::vector<double> shifted{2, 3, 4};
  auto constant = paired_t_test(a, shifted);
  CHECK(std::isinf(constant.t));
  CHECK(constant.p == 0.0);
  CHECK(constant.winner == Winner::kFirst);

  std::vector<double> one{1.0};
  CHECK_THROWS_AS(paired_t_test(one, one), DataError);
  CHECK_THROWS_AS(paired_t_test(a, one), DataError);
}

TEST_CASE("cauchy tail") {
  for (double t : {0.1, 1.0, 3.0, 40.0})
    CHECK(student_t_two_sided_p(t, 1.0) == doctest::Approx(1.0 - 2.0 / M_PI * std::atan(t)).epsilon(1e-12));
}

TEST_CASE("t tail against numerical integration") {
  for (double df : {1.0, 2.0, 4.0, 9.0, 29.0, 120.0}) {
    for (double t : {0.0, 0.3, 1.0, 1.96, 2.5, 4.0, 8.0}) {
      INFO("df=" << df << " t=" << t);
      CHECK(std::abs(student_t_two_sided_p(t, df) - oracle::t_two_sided_p(t, df)) <= 1e-8);
      CHECK(student_t_two_sided_p(-t, df) == student_t_two_sided_p(t, df));
    }
  }
  CHECK(student_t_cdf(0.0, 5.0) == doctest::Approx(0.5));
  CHECK(student_t_cdf(1.5, 5.0) + student_t_cdf(-1.5, 5.0) == doctest::Approx(1.0));
}

TEST_CASE("incomplete beta edges") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  CHECK(incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37));
  CHECK(incomplete_beta(2.0, 1.0, 0.5) == doctest::Approx(0.25));
}
