#include <benchmark/benchmark.h>

#include <random>

#include "poststab/bayes.hpp"
#include "poststab/bounds.hpp"
#include "poststab/gaussian.hpp"

namespace {

using namespace poststab;

void BM_Posterior(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<double> xs(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = static_cast<double>(i);
    v[i] = u(rng);
  }
  auto s = FiniteMetricSpace::line(xs);
  auto mu = DiscreteMeasure::uniform(s);
  auto phi = shift_to_zero_essinf(s, v, mu);
  for (auto _ : state) benchmark::DoNotOptimize(posterior(mu, phi).evidence);
}
BENCHMARK(BM_Posterior)->RangeMultiplier(8)->Range(64, 1 << 18);

void BM_HellingerPhiBound(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<double> xs(n), v(n), vt(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = static_cast<double>(i);
    v[i] = u(rng);
    vt[i] = v[i] + 0.1 * u(rng);
  }
  auto s = FiniteMetricSpace::line(xs);
  auto mu = DiscreteMeasure::uniform(s);
  auto phi = shift_to_zero_essinf(s, v, mu);
  LogLikelihood phit(s, vt);
  for (auto _ : state) benchmark::DoNotOptimize(hellinger_phi_bound(mu, phi, phit).rhs);
}
BENCHMARK(BM_HellingerPhiBound)->RangeMultiplier(8)->Range(64, 1 << 15);

void BM_FredholmPowerTail(benchmark::State& state) {
  GaussianSpectralPair p;
  const auto K = static_cast<std::size_t>(state.range(0));
  for (std::size_t k = 1; k <= K; ++k) {
    p.dm.push_back(0.0);
    p.c.push_back(1.0 / double(k * k));
    p.t.push_back(1.0 + 1.0 / double(k * k));
  }
  p.tail = TailModel::Power;
  p.tail_amplitude = 1.0;
  p.tail_exponent = 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(hellinger_gauss_cov(p, 1e-12));
}
BENCHMARK(BM_FredholmPowerTail)->Arg(50)->Arg(200)->Arg(5000);

}  // namespace
