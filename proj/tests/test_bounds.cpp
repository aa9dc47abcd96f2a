#include <doctest.h>

#include <cmath>
#include <random>

#include "margin_forge/bounds.hpp"
#include "margin_forge/error.hpp"
#include "oracles.hpp"

using namespace margin_forge;

namespace {

PredictionMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t T) {
  std::bernoulli_distribution coin(0.8);
  std::vector<std::int8_t> e(n * T);
  std::vector<int> y(n, 1);
  for (auto& v : e) v = coin(rng) ? 1 : -1;
  return PredictionMatrix(n, T, std::move(e), std::move(y));
}

}  // namespace

TEST_CASE("schapire terms") {
  MarginProfile ones(std::vector<double>(5, 1.0));
  auto a = schapire_terms(ones, 0.5, 3.0, 5.0);
  CHECK(a.applicable);
  CHECK(a.empirical_term == 0.0);
  auto b = schapire_terms(ones, 0.1, 10.0, 1000.0);
  CHECK(b.complexity_term == doctest::Approx(1.0));
  MarginProfile mixed(std::vector<double>{-0.2, 0.3, 0.6});
  CHECK(schapire_terms(mixed, 0.3, 1.0, 3.0).empirical_term == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(schapire_terms(mixed, 0.0, 1.0, 3.0), ConfigError);
  MarginProfile raw(std::vector<double>{0.1, 2.0}, false);
  CHECK_FALSE(schapire_terms(raw, 0.3, 1.0, 2.0).applicable);
}

TEST_CASE("breiman bound") {
  CHECK_FALSE(breiman_bound(0.5, 100.0, 1e6, 0.05).applicable);  // 4 sqrt(0.02) ~ 0.566
  auto ok = breiman_bound(0.6, 100.0, 1e6, 0.05);
  REQUIRE(ok.applicable);
  const double R = 32.0 / (1e6 * 0.36) * std::log(200.0);
  CHECK(ok.breiman_r == doctest::Approx(R));
  CHECK(ok.value == doctest::Approx(R * (1.0 + std::log(2e6) - std::log(R)) + std::log(100.0 / 0.05) / 1e6));
  double prev = ok.value;
  for (double t0 : {0.7, 0.8, 0.9, 1.0}) {
    auto r = breiman_bound(t0, 100.0, 1e6, 0.05);
    REQUIRE(r.applicable);
    CHECK(r.value < prev);
    prev = r.value;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double n : {1e4, 1e5, 1e6, 1e7, 1e8}) {
    auto r = breiman_bound(0.8, 100.0, n, 0.05);
    REQUIRE(r.applicable);
    CHECK(r.value < prev);
    prev = r.value;
  }
  CHECK(prev < 1e-4);
  CHECK_FALSE(breiman_bound(0.8, 100.0, 1e6, 1.5).applicable);
  CHECK_FALSE(breiman_bound(0.8, 1.0, 1e6, 0.05).applicable);
}

TEST_CASE("germain bound special cases") {
  PredictionMatrix perfect(4, 1, {1, -1, 1, -1}, {1, -1, 1, -1});
  std::vector<double> one{1.0};
  auto p = germain_bound(perfect, one);
  REQUIRE(p.applicable);
  CHECK(p.value == doctest::Approx(0.0));

  // Two copies of a learner with error 1/4 never disagree.
  PredictionMatrix twin(4, 2, {1, 1, -1, -1, 1, 1, 1, 1}, {1, -1, 1, -1});
  std::vector<double> half{0.5, 0.5};
  auto t = germain_bound(twin, half);
  REQUIRE(t.applicable);
  CHECK(t.disagreement == 0.0);
  CHECK(t.value == doctest::Approx(0.5));
  CHECK(t.value_squared == doctest::Approx(0.75));

  PredictionMatrix wrong(2, 1, {-1, 1}, {1, -1});
  CHECK_FALSE(germain_bound(wrong, one).applicable);
  std::vector<double> off{0.7, 0.7};
  CHECK_FALSE(germain_bound(twin, off).applicable);
}

TEST_CASE("germain bound against per-row sums and margin moments") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto H = random_matrix(rng, 30, 6);
    std::exponential_distribution<double> ex(1.0);
    std::vector<double> w(6);
    double s = 0.0;
    for (auto& v : w) s += (v = ex(rng));
    for (auto& v : w) v /= s;
    auto [R, dQ] = oracle::gibbs_and_disagreement(H, w);
    auto g = germain_bound(H, w);
    CHECK(std::abs(g.gibbs_risk - R) <= 1e-10);
    CHECK(std::abs(g.disagreement - dQ) <= 1e-10);
    CHECK(std::abs(g.gibbs_risk_from_margins - R) <= 1e-10);
    CHECK(std::abs(g.disagreement_from_margins - dQ) <= 1e-10);
    if (g.applicable) {
      CHECK(std::abs(g.value - (1.0 - (1.0 - 2.0 * R) / (1.0 - 2.0 * dQ))) <= 1e-10);
      CHECK(std::abs(g.value_squared - (1.0 - (1.0 - 2.0 * R) * (1.0 - 2.0 * R) / (1.0 - 2.0 * dQ))) <= 1e-10);
      CHECK(g.value_squared >= g.value - 1e-12);  // (1 - 2R)^2 <= 1 - 2R when R in [0, 1/2]
    }
  }
}
