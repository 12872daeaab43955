#include <benchmark/benchmark.h>

#include <random>

#include "mlspec/ddouble.hpp"

using namespace mlspec;

static void BM_dd_add(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DDouble a = DDouble(u(rng)) + DDouble(u(rng) * 1e-17);
  DDouble b = DDouble(u(rng)) + DDouble(u(rng) * 1e-17);
  for (auto _ : state) {
    a = a + b;
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(BM_dd_add);

static void BM_dd_mul(benchmark::State& state) {
  DDouble a(1.0000000001), b(0.9999999999);
  for (auto _ : state) {
    benchmark::DoNotOptimize(a * b);
  }
}
BENCHMARK(BM_dd_mul);

static void BM_dd_sincos(benchmark::State& state) {
  DDouble x(0.7), s, c;
  for (auto _ : state) {
    sincos(x, s, c);
    benchmark::DoNotOptimize(s);
    x = x + DDouble(1e-9);
  }
}
BENCHMARK(BM_dd_sincos);

BENCHMARK_MAIN();
