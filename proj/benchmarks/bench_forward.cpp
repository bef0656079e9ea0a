#include <benchmark/benchmark.h>

#include "fpot/drift.hpp"
#include "fpot/fp_forward.hpp"
#include "fpot/measure.hpp"

using namespace fpot;

namespace {

void BM_Evolve1d(benchmark::State& state) {
  const Grid grid(1, 8.0, static_cast<int>(state.range(0)));
  const auto mu0 = DiscreteMeasure::from_density(gaussian_density_1d(-0.5, 0.09), grid);
  const auto drift = DriftSpec::ou(1.0);
  SolverConfig cfg;
  cfg.grid = grid;
  cfg.t_end = 0.05;
  cfg.stride = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve(mu0, drift, cfg).mass_drift);
  }
}

void BM_Evolve2d(benchmark::State& state) {
  const Grid grid(2, 5.0, static_cast<int>(state.range(0)));
  const auto mu0 = DiscreteMeasure::from_density(gaussian_density_2d({-0.75, 0.0}, 0.04), grid);
  const auto drift = DriftSpec::rotation(1.0);
  SolverConfig cfg;
  cfg.grid = grid;
  cfg.t_end = 0.02;
  cfg.stride = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve(mu0, drift, cfg).mass_drift);
  }
}

void BM_EvolveRescaled(benchmark::State& state) {
  const Grid grid(1, 8.0, static_cast<int>(state.range(0)));
  const auto mu0 = DiscreteMeasure::from_density(gaussian_density_1d(0.3, 0.09), grid);
  const auto field = rescaled_field(DriftSpec::ou(1.0).a_field(), 1.0);
  SolverConfig cfg;
  cfg.grid = grid;
  cfg.stride = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve_rescaled(mu0, field, 0.0, 0.05, cfg).mass_drift);
  }
}

BENCHMARK(BM_Evolve1d)->RangeMultiplier(2)->Range(80, 640);
BENCHMARK(BM_Evolve2d)->RangeMultiplier(2)->Range(24, 96);
BENCHMARK(BM_EvolveRescaled)->RangeMultiplier(2)->Range(80, 320);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
