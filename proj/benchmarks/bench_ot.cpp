#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fpot/cost.hpp"
#include "fpot/measure.hpp"
#include "fpot/ot.hpp"

using namespace fpot;

namespace {

DiscreteMeasure cloud(std::mt19937_64& rng, int n, int dim) {
  std::uniform_real_distribution<double> P(-3.0, 3.0);
  std::uniform_real_distribution<double> W(0.05, 1.0);
  std::vector<Vec> pts;
  std::vector<double> w;
  for (int i = 0; i < n; ++i) {
    pts.push_back(dim == 1 ? Vec{P(rng), 0.0} : Vec{P(rng), P(rng)});
    w.push_back(W(rng));
  }
  return DiscreteMeasure::from_weighted_points(pts, w, dim, true);
}

void BM_TransportConvex1d(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const auto mu1 = cloud(rng, n, 1);
  const auto mu2 = cloud(rng, n, 1);
  const auto h = CostFn::power(2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(transport_cost(mu1, mu2, h, 2048).cost);
  }
}

void BM_TransportGeneral1d(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const auto mu1 = cloud(rng, n, 1);
  const auto mu2 = cloud(rng, n, 1);
  const auto h = CostFn::power(2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(transport_cost_general(mu1, mu2, h, 2048).cost);
  }
}

void BM_TransportBounded2d(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int n = static_cast<int>(state.range(0));
  const auto mu1 = cloud(rng, n, 2);
  const auto mu2 = cloud(rng, n, 2);
  const auto h = CostFn::bounded_concave(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(transport_cost(mu1, mu2, h, 2048).cost);
  }
}

void BM_HTransform(benchmark::State& state) {
  const Grid grid(1, 8.0, static_cast<int>(state.range(0)));
  const auto pts = grid.centers();
  const auto h = CostFn::power(2.0);
  std::vector<double> zeta(pts.size(), 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(h_transform(h, pts, zeta, pts));
  }
}

void BM_CoarsenSupport(benchmark::State& state) {
  const Grid grid(1, 8.0, 640);
  const auto mu = DiscreteMeasure::from_density(gaussian_density_1d(0.0, 0.25), grid);
  const int budget = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(coarsen_support(mu, budget).measure.size());
  }
}

BENCHMARK(BM_TransportConvex1d)->RangeMultiplier(4)->Range(16, 1024);
BENCHMARK(BM_TransportGeneral1d)->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(BM_TransportBounded2d)->RangeMultiplier(4)->Range(16, 256);
BENCHMARK(BM_HTransform)->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_CoarsenSupport)->RangeMultiplier(2)->Range(32, 256);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
