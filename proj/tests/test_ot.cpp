#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fpot/cost.hpp"
#include "fpot/measure.hpp"
#include "fpot/ot.hpp"

using namespace fpot;

namespace {

DiscreteMeasure random_cloud(std::mt19937_64& rng, int n, int dim) {
  std::uniform_real_distribution<double> P(-3.0, 3.0);
  std::uniform_real_distribution<double> W(0.05, 1.0);
  std::vector<Vec> pts(n);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    pts[i] = {P(rng), dim == 2 ? P(rng) : 0.0};
    w[i] = W(rng);
  }
  return DiscreteMeasure::from_weighted_points(std::move(pts), std::move(w), dim);
}

}  // namespace

TEST_CASE("single pair pays the cost of its distance") {
  const auto mu = DiscreteMeasure::from_weighted_points({{0.0}}, {1.0}, 1);
  const auto nu = DiscreteMeasure::from_weighted_points({{0.7}}, {1.0}, 1);
  const auto res = transport_cost(mu, nu, CostFn::power(2.0));
  CHECK(res.cost == doctest::Approx(0.49).epsilon(1e-14));
  CHECK(res.gap == doctest::Approx(0.0));
  CHECK(res.phi1[0] == 0.0);
}

TEST_CASE("two point closed forms") {
  const auto mu = DiscreteMeasure::from_weighted_points({{0.0}, {1.0}}, {0.5, 0.5}, 1);
  const auto nu = DiscreteMeasure::from_weighted_points({{0.25}}, {1.0}, 1);
  CHECK(transport_cost(mu, nu, CostFn::power(2.0)).cost ==
        doctest::Approx(0.3125).epsilon(1e-12));
  CHECK(transport_cost(mu, nu, CostFn::power(1.0)).cost == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(transport_cost(mu, nu, CostFn::bounded_concave(1.0)).cost ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("translation moves every quantile by the shift") {
  const Grid grid(1, 4.0, 64);
  const auto mu = DiscreteMeasure::from_density(gaussian_density_1d(-0.3, 0.09), grid);
  const auto nu = mu.translate({0.3});
  CHECK(transport_cost(mu, nu, CostFn::power(2.0)).cost == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(transport_cost(mu, nu, CostFn::power(1.0)).cost == doctest::Approx(0.3).epsilon(1e-12));

  const Grid grid2(2, 4.0, 24);
  const auto m2 = DiscreteMeasure::from_density(gaussian_density_2d({-0.2, 0.0}, 0.16), grid2);
  const auto n2 = m2.translate({0.3, 0.4});
  const auto res = transport_cost_general(m2, n2, CostFn::power(2.0));
  CHECK(res.cost == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("gaussian wasserstein distance on the benchmark grid") {
  const Grid grid(1, 8.0, 320);
  const auto mu1 = DiscreteMeasure::from_density(gaussian_density_1d(0.0, 0.04), grid);
  const auto mu2 = DiscreteMeasure::from_density(gaussian_density_1d(0.3, 0.16), grid);
  const double w2 = wasserstein_p(mu1, mu2, 2.0);
  // mean shift^2 + (sigma1 - sigma2)^2 = 0.09 + 0.04; quadrature error ~3e-4.
  CHECK(w2 * w2 == doctest::Approx(0.13).epsilon(1e-2));
  CHECK(std::abs(w2 * w2 - 0.13) <= 1e-3);
}

TEST_CASE("duality gap and marginals on random instances") {
  std::mt19937_64 rng(20240817);
  const std::vector<CostFn> costs = {CostFn::power(1.0), CostFn::power(1.5), CostFn::power(2.0),
                                     CostFn::power(3.0), CostFn::bounded_concave(0.7)};
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + trial % 2;
    const auto mu1 = random_cloud(rng, 2 + int(rng() % 63), dim);
    const auto mu2 = random_cloud(rng, 2 + int(rng() % 63), dim);
    const auto& h = costs[trial % costs.size()];
    const auto res = transport_cost_general(mu1, mu2, h);
    CHECK(std::abs(res.gap) <= 1e-9 * (1.0 + res.cost));
    CHECK(res.max_marginal_error <= 1e-10);
    CHECK(res.worst_feasibility <= 1e-9);

    std::vector<double> row(mu1.size(), 0.0), col(mu2.size(), 0.0);
    for (std::size_t k = 0; k < res.coupling.weights.size(); ++k) {
      row[res.coupling.rows[k]] += res.coupling.weights[k];
      col[res.coupling.cols[k]] += res.coupling.weights[k];
    }
    for (std::size_t i = 0; i < row.size(); ++i)
      CHECK(row[i] == doctest::Approx(mu1.weights()[i]).epsilon(1e-9));
    for (std::size_t j = 0; j < col.size(); ++j)
      CHECK(col[j] == doctest::Approx(mu2.weights()[j]).epsilon(1e-9));
  }
}

TEST_CASE("sorted quantile path agrees with the general solver") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mu1 = random_cloud(rng, 2 + int(rng() % 127), 1);
    const auto mu2 = random_cloud(rng, 2 + int(rng() % 127), 1);
    const auto h = trial % 2 ? CostFn::power(2.0) : CostFn::power(1.3);
    const auto fast = transport_cost(mu1, mu2, h);
    CHECK(fast.fast_path);
    CHECK(fast.pivots == 0);
    const auto full = transport_cost_general(mu1, mu2, h);
    CHECK(std::abs(fast.cost - full.cost) <= 1e-9 * (1.0 + full.cost));
  }

  const auto mu = random_cloud(rng, 40, 1);
  const auto nu = random_cloud(rng, 40, 1);
  CHECK_FALSE(transport_cost(mu, nu, CostFn::bounded_concave(1.0)).fast_path);
}

TEST_CASE("solver guards its budget and marginal masses") {
  std::mt19937_64 rng(7);
  const auto mu1 = random_cloud(rng, 200, 1);
  const auto mu2 = random_cloud(rng, 200, 1);
  CHECK_THROWS_WITH_AS(transport_cost(mu1, mu2, CostFn::power(2.0), 128),
                       "exceeds exact-solver budget", std::invalid_argument);

  const auto a = DiscreteMeasure::from_weighted_points({{0.0}, {1.0}}, {0.5, 0.5}, 1, false);
  const auto b = DiscreteMeasure::from_weighted_points({{0.0}, {1.0}}, {1.0, 1.0}, 1, false);
  CHECK_THROWS_WITH_AS(transport_cost(a, b, CostFn::power(2.0)), "marginal mass mismatch",
                       std::invalid_argument);
}

TEST_CASE("coarsened transport stays within the merge radii") {
  const Grid grid(1, 8.0, 320);
  const auto mu1 = DiscreteMeasure::from_density(gaussian_density_1d(-0.5, 0.09), grid);
  const auto mu2 = DiscreteMeasure::from_density(gaussian_density_1d(0.5, 0.25), grid);
  const auto exact = transport_cost(mu1, mu2, CostFn::power(2.0));
  const auto coarse = transport_cost_coarsened(mu1, mu2, CostFn::power(2.0), 64);
  REQUIRE(coarse.coarsened);
  CHECK(coarse.radius1 > 0.0);
  const double dev = std::abs(std::sqrt(coarse.result.cost) - std::sqrt(exact.cost));
  CHECK(dev <= coarse.radius1 + coarse.radius2 + 1e-9);
}

TEST_CASE("cost ladder converges from below") {
  std::mt19937_64 rng(513);
  const auto mu1 = random_cloud(rng, 32, 1);
  const auto mu2 = random_cloud(rng, 32, 1);
  const auto h = CostFn::power(2.0);
  std::vector<CostFn> ladder;
  for (double n : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) ladder.push_back(lipschitz_approx(h, n));
  const auto rep = stability_check(h, ladder, mu1, mu2);
  CHECK(rep.monotone);
  CHECK(rep.deviation >= -1e-12);
  CHECK(rep.deviation <= 1e-6);
  for (std::size_t i = 1; i < rep.approx_costs.size(); ++i)
    CHECK(rep.approx_costs[i] >= rep.approx_costs[i - 1] - 1e-12);
}

TEST_CASE("perturbed cost obeys the linear budget") {
  const Grid grid(1, 6.0, 96);
  const auto mu1 = DiscreteMeasure::from_density(gaussian_density_1d(-0.4, 0.09), grid);
  const auto mu2 = DiscreteMeasure::from_density(gaussian_density_1d(0.6, 0.16), grid);
  const auto h = CostFn::power(1.0);
  const double base = transport_cost(mu1, mu2, h).cost;
  for (double eps : {0.1, 0.01}) {
    const auto pert = unbounded_perturbation(h, eps, {&mu1, &mu2});
    const double bumped = transport_cost_general(mu1, mu2, pert.cost).cost;
    CHECK(bumped <= base + eps * pert.g_integral + 1e-9);
    CHECK(bumped >= base - 1e-9);
  }
}
