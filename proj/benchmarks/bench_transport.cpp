#include <benchmark/benchmark.h>

#include <random>

#include "poststab/measure.hpp"
#include "poststab/transport.hpp"

namespace {

using namespace poststab;

struct Pair {
  DiscreteMeasure a, b;
};

Pair random_pair(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(n), wa(n), wb(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = 10.0 * u(rng);
    wa[i] = u(rng);
    wb[i] = u(rng);
  }
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < n; ++i) sa += wa[i], sb += wb[i];
  for (std::size_t i = 0; i < n; ++i) wa[i] /= sa, wb[i] /= sb;
  auto s = FiniteMetricSpace::line(xs);
  return {DiscreteMeasure(s, wa), DiscreteMeasure(s, wb)};
}

void BM_Wasserstein1d(benchmark::State& state) {
  const auto p = random_pair(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein_1d(p.a, p.b, 2.0).value());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Wasserstein1d)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_WassersteinLp(benchmark::State& state) {
  const auto p = random_pair(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein_lp(p.a, p.b, 1.0).value());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_WassersteinLp)->RangeMultiplier(2)->Range(8, 128)->Complexity();

}  // namespace
