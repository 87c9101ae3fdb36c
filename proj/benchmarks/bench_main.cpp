#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "cmrkit/feasibility.hpp"
#include "cmrkit/fit.hpp"
#include "cmrkit/rng.hpp"
#include "cmrkit/synth.hpp"

using namespace cmrkit;

namespace {

std::vector<Point> power2_data(int n, double sigma) {
  const PowerLaw2 truth{0.05, -0.6, -0.001, 0.8, 0.02};
  Rng rng(1234);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    const double x = 1.0 * std::pow(100.0, static_cast<double>(i) / (n - 1));
    pts.push_back({x, evaluate(truth, x) + rng.normal(0.0, sigma)});
  }
  return pts;
}

std::vector<Point> power1_data(int n) {
  const PowerLaw1 truth{-0.4, 0.18, 1.9};
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    const double x = 0.1 + 0.9 * static_cast<double>(i) / (n - 1);
    pts.push_back({x, evaluate(truth, x)});
  }
  return pts;
}

void BM_FitPower1(benchmark::State& state) {
  const auto pts = power1_data(static_cast<int>(state.range(0)));
  FitOptions opt;
  for (auto _ : state) {
    auto result = fit_power1(pts, opt);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_FitPower1)->Arg(4)->Arg(16)->Arg(64);

void BM_FitPower2(benchmark::State& state) {
  const auto pts = power2_data(static_cast<int>(state.range(0)), 1e-4);
  FitOptions opt;
  for (auto _ : state) {
    auto result = fit_power2(pts, opt);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_FitPower2)->Arg(8)->Arg(25)->Arg(100);

void BM_SolveT0(benchmark::State& state) {
  const PowerLaw1 dom{-0.02, 0.5, 0.0};
  const PowerLaw2 gen{0.01, 0.3, -0.002, 0.9, 0.0};
  for (auto _ : state) {
    auto result = solve_t0(dom, gen, 1000.0, 1e-3, 100.0);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_SolveT0);

void BM_GridT0Oracle(benchmark::State& state) {
  const PowerLaw1 dom{-0.02, 0.5, 0.0};
  const PowerLaw2 gen{0.01, 0.3, -0.002, 0.9, 0.0};
  const long n = state.range(0);
  for (auto _ : state) {
    auto result = grid_t0_oracle(dom, gen, 1000.0, 1e-3, 100.0, n);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_GridT0Oracle)->Arg(100000)->Arg(1000000);

void BM_ClassifyRatio(benchmark::State& state) {
  const PowerLaw1 dom{-0.02, 0.5, 0.0};
  const PowerLaw2 gen{0.01, 0.3, -0.002, 0.9, 0.0};
  const RatioInterval tol{0.0, 0.6, false};
  const FeasibilityConfig cfg{0.05, 1000.0, 100.0, 1e-3};
  for (auto _ : state) {
    auto v = classify_ratio(0.25, dom, gen, tol, cfg);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_ClassifyRatio);

}  // namespace

BENCHMARK_MAIN();
