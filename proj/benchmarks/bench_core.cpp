#include <benchmark/benchmark.h>

#include "doobkit/classd.hpp"
#include "doobkit/doob.hpp"
#include "doobkit/lattice.hpp"
#include "doobkit/mc.hpp"
#include "doobkit/refine.hpp"
#include "doobkit/trees.hpp"

using namespace doobkit;

static void BM_DoobDecompose(benchmark::State& state) {
  const auto x = squared(tree_walk(binary_tree_filtration(static_cast<std::size_t>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(doob_decompose(x));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(x.atom_count()));
}
BENCHMARK(BM_DoobDecompose)->DenseRange(4, 12, 4);

static void BM_NaturalityMismatch(benchmark::State& state) {
  const auto x = squared(tree_walk(binary_tree_filtration(static_cast<std::size_t>(state.range(0)))));
  const auto a = doob_decompose(x).a;
  for (auto _ : state) benchmark::DoNotOptimize(naturality_mismatch(a));
}
BENCHMARK(BM_NaturalityMismatch)->DenseRange(4, 12, 4);

static void BM_EpsilonProfile(benchmark::State& state) {
  const auto x = squared(tree_walk(binary_tree_filtration(10)));
  const std::vector<double> levels{1, 2, 4, 8, 16};
  for (auto _ : state) benchmark::DoNotOptimize(epsilon_profile(x, levels));
}
BENCHMARK(BM_EpsilonProfile);

static void BM_LatticeCompensator(benchmark::State& state) {
  ModelSpec m;
  m.kind = ModelKind::recombining_lattice;
  m.functional = WalkFunctional::walk_squared;
  const auto grid = dyadic_grid(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lattice_compensator(m, grid));
}
BENCHMARK(BM_LatticeCompensator)->DenseRange(4, 10, 3);

static void BM_SimulatePoisson(benchmark::State& state) {
  const auto model = make_poisson_model(1.0);
  const auto grid = dyadic_grid(6);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(*model, grid, 10000, 7, 1));
}
BENCHMARK(BM_SimulatePoisson)->Unit(benchmark::kMillisecond);

static void BM_EstimateBinning(benchmark::State& state) {
  const auto model = make_gaussian_walk_squared_model();
  const auto batch = simulate(*model, dyadic_grid(6), 10000, 7, 1);
  const auto est = CondExpEstimator::parse("binning:50");
  for (auto _ : state) benchmark::DoNotOptimize(estimate_compensator(*model, batch, est));
}
BENCHMARK(BM_EstimateBinning)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
