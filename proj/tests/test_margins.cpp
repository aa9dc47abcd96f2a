#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "margin_forge/error.hpp"
#include "margin_forge/margins.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace margin_forge;

namespace {

PredictionMatrix matrix(std::vector<std::vector<int>> rows, std::vector<int> labels) {
  std::vector<std::int8_t> e;
  for (const auto& r : rows)
    for (int v : r) e.push_back(static_cast<std::int8_t>(v));
  return PredictionMatrix(rows.size(), rows.front().size(), std::move(e), std::move(labels));
}

PredictionMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t T) {
  std::bernoulli_distribution coin(0.6);
  std::vector<std::int8_t> e(n * T);
  std::vector<int> y(n);
  for (auto& v : e) v = coin(rng) ? 1 : -1;
  for (auto& v : y) v = coin(rng) ? 1 : -1;
  return PredictionMatrix(n, T, std::move(e), std::move(y));
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t T) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> w(T);
  double s = 0.0;
  for (auto& v : w) s += (v = ex(rng));
  for (auto& v : w) v /= s;
  return w;
}

}  // namespace

TEST_CASE("hand margins") {
  auto all = compute_margins(matrix({{1, 1}}, {1}), std::vector<double>{0.5, 0.5});
  CHECK(all.margins()[0] == 1.0);
  auto split = compute_margins(matrix({{1, -1}}, {1}), std::vector<double>{0.5, 0.5});
  CHECK(split.margins()[0] == 0.0);
  auto three = compute_margins(matrix({{-1, 1, -1}}, {-1}), std::vector<double>{0.2, 0.3, 0.5});
  CHECK(three.margins()[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_THROWS_AS(compute_margins(matrix({{1, 1}}, {1}), std::vector<double>{1.0}), DataError);
}

TEST_CASE("profile statistics, percentile and invariants") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto H = random_matrix(rng, 37, 9);
    auto w = random_simplex(rng, 9);
    auto prof = compute_margins(H, w);
    auto ref = oracle::margins(H, w);
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(std::abs(prof.margins()[i] - ref[i]) <= 1e-12);
      CHECK(prof.margins()[i] >= -1.0 - 1e-12);
      CHECK(prof.margins()[i] <= 1.0 + 1e-12);
      mean += ref[i] / 37.0;
      sq += ref[i] * ref[i] / 37.0;
    }
    CHECK(std::abs(prof.mean() - mean) <= 1e-12);
    CHECK(std::abs(prof.second_moment() - sq) <= 1e-12);
    CHECK(std::abs(prof.variance() - (sq - mean * mean)) <= 1e-12);
    CHECK(prof.min() <= prof.mean());
    CHECK(prof.mean() <= prof.max());
    auto sorted = ref;
    std::sort(sorted.begin(), sorted.end());
    CHECK(prof.percentile(0.05) == sorted[1]);  // ceil(37 * 0.05) = 2
    CHECK(prof.percentile(0.5) == sorted[18]);  // ceil(18.5) = 19
  }
}

TEST_CASE("permuting learners together with weights keeps margins") {
  std::mt19937_64 rng(8);
  auto H = random_matrix(rng, 20, 5);
  auto w = random_simplex(rng, 5);
  std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  std::vector<std::int8_t> e(H.rows() * 5);
  std::vector<double> pw(5);
  for (std::size_t t = 0; t < 5; ++t) {
    pw[t] = w[perm[t]];
    for (std::size_t i = 0; i < H.rows(); ++i) e[i * 5 + t] = static_cast<std::int8_t>(H.at(i, perm[t]));
  }
  PredictionMatrix P(H.rows(), 5, e, std::vector<int>(H.labels().begin(), H.labels().end()));
  auto a = compute_margins(H, w), b = compute_margins(P, pw);
  for (std::size_t i = 0; i < H.rows(); ++i) CHECK(std::abs(a.margins()[i] - b.margins()[i]) <= 1e-15);
}

TEST_CASE("margin sign matches vote correctness with the +1 tie rule") {
  auto d = generate_synthetic(SyntheticKind::kRingVsDisk, 200, 0.6, 3);
  auto m = adaboost(d, 25, TreeParams{});
  auto prof = compute_margins(prediction_matrix(m, d), m.weights);
  std::size_t nonpos = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double mi = prof.margins()[i];
    const bool correct = predict(m, d.row(i)) == d.label(i);
    // A zero margin is a tie, which the vote resolves to +1.
    if (mi > 0.0) CHECK(correct);
    if (mi < 0.0) CHECK(!correct);
    if (mi == 0.0) CHECK(correct == (d.label(i) == 1));
    if (!correct) ++nonpos;
  }
  CHECK(test_error(m, d) == static_cast<double>(nonpos) / static_cast<double>(d.rows()));
}

TEST_CASE("cmd counts inclusively and is a right-continuous step function") {
  MarginProfile p(std::vector<double>{-1.0, 0.0, 1.0});
  std::vector<double> grid{-2.0, -1.0, 0.0, 0.5, 1.0, 3.0};
  auto c = cmd(p, grid);
  CHECK(c[0].fraction == 0.0);
  CHECK(c[1].fraction == doctest::Approx(1.0 / 3.0));
  CHECK(c[2].fraction == doctest::Approx(2.0 / 3.0));
  CHECK(c[4].fraction == 1.0);
  CHECK(c[5].fraction == 1.0);
  std::vector<double> unsorted{0.5, 0.1};
  CHECK_THROWS(cmd(p, unsorted));
  MarginProfile flat(std::vector<double>(10, 0.25));
  auto steps = cmd(flat);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].theta == 0.25);
  CHECK(steps[0].fraction == 1.0);
}

TEST_CASE("margin improvement") {
  MarginProfile a(std::vector<double>{0.1, 0.2, 0.3});
  auto same = margin_improvement(a, a);
  CHECK(same.mean == 0.0);
  CHECK(same.min == 0.0);
  MarginProfile b(std::vector<double>{0.15, 0.25, 0.35});
  auto up = margin_improvement(a, b);
  CHECK(up.mean == doctest::Approx(0.05));
  CHECK(up.min == doctest::Approx(0.05));
  CHECK_THROWS(margin_improvement(a, MarginProfile(std::vector<double>{0.1})));
}
