#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "margin_forge/cart.hpp"
#include "margin_forge/dataset.hpp"
#include "margin_forge/ensemble.hpp"
#include "margin_forge/kernels.hpp"

using namespace margin_forge;

namespace {

struct Fixture {
  Dataset data;
  EnsembleModel model;
  std::vector<std::int8_t> H;
  std::vector<double> w;

  explicit Fixture(std::size_t n) {
    data = generate_synthetic(SyntheticKind::kTwoGaussians, n, 1.0, 3, 20);
    model = random_forest(data, 200, TreeParams{}, 5);
    H.resize(n * model.size());
    kernels::serial::predict_all(model.learners, data, H);
    w = model.weights;
  }
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, Fixture> cache;
  return cache.try_emplace(n, n).first->second;
}

std::vector<double> random_tableau(std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> t(rows * cols);
  for (double& v : t) v = u(rng);
  t[cols + 1] = 2.0;
  return t;
}

template <bool Parallel>
void BM_PredictAll(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<std::int8_t> out(f.H.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::predict_all(f.model.learners, f.data, out);
    else
      kernels::serial::predict_all(f.model.learners, f.data, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(out.size()));
}

template <bool Parallel>
void BM_WeightedVotes(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(f.data.rows());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::weighted_votes(f.H, f.model.size(), f.data.labels(), f.w, out);
    else
      kernels::serial::weighted_votes(f.H, f.model.size(), f.data.labels(), f.w, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.H.size()));
}

template <bool Parallel>
void BM_Pivot(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t cols = 2 * rows;
  const auto base = random_tableau(rows, cols);
  auto t = base;
  for (auto _ : state) {
    state.PauseTiming();
    t = base;
    state.ResumeTiming();
    if constexpr (Parallel)
      kernels::parallel::pivot(t, rows, cols, 1, 1);
    else
      kernels::serial::pivot(t, rows, cols, 1, 1);
    benchmark::DoNotOptimize(t.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rows * cols));
}

}  // namespace

BENCHMARK(BM_PredictAll<false>)->Arg(500)->Arg(2000);
BENCHMARK(BM_PredictAll<true>)->Arg(500)->Arg(2000);
BENCHMARK(BM_WeightedVotes<false>)->Arg(500)->Arg(2000);
BENCHMARK(BM_WeightedVotes<true>)->Arg(500)->Arg(2000);
BENCHMARK(BM_Pivot<false>)->Arg(200)->Arg(800);
BENCHMARK(BM_Pivot<true>)->Arg(200)->Arg(800);

BENCHMARK_MAIN();
