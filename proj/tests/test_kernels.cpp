#include <doctest.h>

#include <random>

#include "margin_forge/ensemble.hpp"
#include "margin_forge/error.hpp"
#include "margin_forge/kernels.hpp"
#include "oracles.hpp"

using namespace margin_forge;

TEST_CASE("serial and parallel kernels agree") {
  auto d = generate_synthetic(SyntheticKind::kTwoGaussians, 300, 1.0, 11, 6);
  auto m = random_forest(d, 40, TreeParams{}, 3);
  const std::size_t T = m.size();
  std::vector<std::int8_t> a(d.rows() * T), b(d.rows() * T);
  kernels::serial::predict_all(m.learners, d, a);
  kernels::parallel::predict_all(m.learners, d, b);
  CHECK(a == b);
  for (std::size_t i = 0; i < d.rows(); i += 37)
    for (std::size_t t = 0; t < T; ++t) CHECK(a[i * T + t] == m.learners[t].predict(d.row(i)));

  std::vector<double> va(d.rows()), vb(d.rows());
  kernels::serial::weighted_votes(a, T, d.labels(), m.weights, va);
  kernels::parallel::weighted_votes(a, T, d.labels(), m.weights, vb);
  CHECK(va == vb);
  auto ref = oracle::margins(PredictionMatrix(d.rows(), T, a, std::vector<int>(d.labels().begin(), d.labels().end())),
                             m.weights);
  for (std::size_t i = 0; i < d.rows(); ++i) CHECK(std::abs(va[i] - ref[i]) <= 1e-12);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> tab(12 * 20);
  for (auto& v : tab) v = u(rng);
  tab[3 * 20 + 5] = 2.0;
  auto ta = tab, tb = tab;
  kernels::serial::pivot(ta, 12, 20, 3, 5);
  kernels::parallel::pivot(tb, 12, 20, 3, 5);
  CHECK(ta == tb);
  CHECK(ta[3 * 20 + 5] == 1.0);
  for (std::size_t r = 0; r < 12; ++r)
    if (r != 3) CHECK(std::abs(ta[r * 20 + 5]) <= 1e-15);
}

TEST_CASE("kernel shape checks") {
  auto d = generate_synthetic(SyntheticKind::kTwoGaussians, 10, 1.0, 1, 2);
  auto m = random_forest(d, 3, TreeParams{}, 3);
  std::vector<std::int8_t> small(5);
  CHECK_THROWS(kernels::serial::predict_all(m.learners, d, small));
  CHECK_THROWS(kernels::parallel::predict_all(m.learners, d, small));
}
