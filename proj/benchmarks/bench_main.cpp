#include <benchmark/benchmark.h>

#include <numbers>

#include "fracheat/balakrishnan.hpp"
#include "fracheat/forward_solver.hpp"
#include "fracheat/heat_kernel.hpp"
#include "fracheat/operators.hpp"
#include "fracheat/random_fields.hpp"

using namespace fracheat;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SpaceTimeField sample_field(int K, int samples) {
  const EigenSystem sys = build_eigensystem(ManifoldModel::flat_circle(kTwoPi), K);
  RandomFieldOptions o;
  o.seed = 3;
  o.support_lo = -2.0;
  o.support_hi = 2.0;
  o.min_half_width = 0.6;
  o.max_half_width = 1.2;
  return random_smooth_field(sys, TimeGrid::padded(3.0, 4.0, samples), o);
}

void BM_ToFrequency(benchmark::State& state) {
  const SpaceTimeField u = sample_field(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(to_frequency(u));
  state.SetItemsProcessed(state.iterations() * u.modes() * u.samples());
}
BENCHMARK(BM_ToFrequency)->Args({64, 1024})->Args({256, 1024})->Args({64, 4096});

void BM_ApplyHs(benchmark::State& state) {
  const SpaceTimeField u = sample_field(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_Hs(u, 0.5));
  state.SetItemsProcessed(state.iterations() * u.modes() * u.samples());
}
BENCHMARK(BM_ApplyHs)->Args({64, 1024})->Args({256, 1024})->Args({64, 4096});

void BM_Solve(benchmark::State& state) {
  const SpaceTimeField f = sample_field(static_cast<int>(state.range(0)), 1024);
  for (auto _ : state) benchmark::DoNotOptimize(solve_field(f, 0.5));
}
BENCHMARK(BM_Solve)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_HeatSemigroup(benchmark::State& state) {
  const SpaceTimeField u = sample_field(64, 1024);
  for (auto _ : state) benchmark::DoNotOptimize(heat_semigroup_apply(u, 0.7));
}
BENCHMARK(BM_HeatSemigroup);

void BM_BuildFlatTorus(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ManifoldModel m = ManifoldModel::flat_torus(Eigen::Matrix2d::Identity(), {kTwoPi, kTwoPi}, {80, 80});
  for (auto _ : state) benchmark::DoNotOptimize(build_eigensystem(m, n * n));
}
BENCHMARK(BM_BuildFlatTorus)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_BuildVariableCircle(benchmark::State& state) {
  const ManifoldModel m = ManifoldModel::variable_circle({2.0, 0.0, 1.0}, kTwoPi);
  for (auto _ : state) benchmark::DoNotOptimize(build_eigensystem(m, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_BuildVariableCircle)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_HeatKernelRow(benchmark::State& state) {
  const HeatKernelEvaluator H(build_eigensystem(ManifoldModel::variable_circle({2.0, 0.0, 1.0}, kTwoPi), 64));
  for (auto _ : state) benchmark::DoNotOptimize(H.row_integral(0, 0.1));
}
BENCHMARK(BM_HeatKernelRow);

void BM_BalakrishnanSymbol(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(balakrishnan_symbol(0.5, 0.0, 10.0));
}
BENCHMARK(BM_BalakrishnanSymbol)->Unit(benchmark::kMicrosecond);

}  // namespace
