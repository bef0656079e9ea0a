#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fpot/measure.hpp"
#include "fpot/ot.hpp"

using namespace fpot;

TEST_CASE("weighted points merge duplicates and normalize") {
  const auto raw = DiscreteMeasure::from_weighted_points({{0.0}, {0.0}, {1.0}}, {1.0, 2.0, 3.0},
                                                         1, false);
  CHECK(raw.size() == 2);
  CHECK(raw.total_mass() == doctest::Approx(6.0));

  const auto prob = DiscreteMeasure::from_weighted_points({{-1.0}, {1.0}}, {2.0, 2.0}, 1);
  CHECK(prob.total_mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(prob.mean().x == doctest::Approx(0.0));
  CHECK(prob.axis_variance().x == doctest::Approx(1.0));
  CHECK(prob.second_moment() == doctest::Approx(1.0));
  CHECK(prob.mass_outside_radius(0.5) == doctest::Approx(1.0));
  CHECK(prob.mass_outside_radius(1.5) == doctest::Approx(0.0));
}

TEST_CASE("density quadrature reproduces gaussian moments") {
  const Grid grid(1, 8.0, 320);
  const auto mu = DiscreteMeasure::from_density(gaussian_density_1d(0.3, 0.09), grid);
  CHECK(mu.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mu.mean().x == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(mu.axis_variance().x == doctest::Approx(0.09).epsilon(1e-5));

  const Grid grid2(2, 5.0, 64);
  const auto nu = DiscreteMeasure::from_density(gaussian_density_2d({0.5, -0.25}, 0.25), grid2);
  CHECK(nu.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nu.mean().x == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(nu.mean().y == doctest::Approx(-0.25).epsilon(1e-6));
  CHECK(nu.axis_variance().y == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("translate and scale act on moments") {
  const Grid grid(1, 6.0, 128);
  const auto mu = DiscreteMeasure::from_density(gaussian_density_1d(-0.2, 0.04), grid);
  const auto shifted = mu.translate({0.7});
  CHECK(shifted.mean().x == doctest::Approx(mu.mean().x + 0.7).epsilon(1e-12));
  CHECK(shifted.axis_variance().x == doctest::Approx(mu.axis_variance().x).epsilon(1e-12));

  const auto scaled = mu.pushforward_scale(2.0);
  CHECK(scaled.mean().x == doctest::Approx(2.0 * mu.mean().x).epsilon(1e-12));
  CHECK(scaled.axis_variance().x == doctest::Approx(4.0 * mu.axis_variance().x).epsilon(1e-12));
}

TEST_CASE("csv round trip") {
  const auto mu = DiscreteMeasure::from_weighted_points({{0.25, -1.5}, {2.0, 0.5}}, {0.3, 0.7}, 2);
  std::stringstream ss;
  mu.write_csv(ss);
  const auto back = DiscreteMeasure::read_csv(ss);
  REQUIRE(back.size() == mu.size());
  CHECK(back.dim() == 2);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    CHECK(back.points()[i].x == doctest::Approx(mu.points()[i].x).epsilon(1e-12));
    CHECK(back.points()[i].y == doctest::Approx(mu.points()[i].y).epsilon(1e-12));
    CHECK(back.weights()[i] == doctest::Approx(mu.weights()[i]).epsilon(1e-12));
  }
}

TEST_CASE("coarsening below budget is the identity") {
  const auto mu = DiscreteMeasure::from_weighted_points(
      {{0.0}, {0.5}, {1.0}, {2.5}}, {0.1, 0.2, 0.3, 0.4}, 1);
  const auto res = coarsen_support(mu, 16);
  CHECK_FALSE(res.coarsened);
  CHECK(res.measure.size() == 4);
  CHECK(res.radius == 0.0);
  CHECK(res.disp1 == 0.0);
  CHECK(res.disp2 == 0.0);
  CHECK(res.mass == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("coarsening preserves mass and mean and reports displacement") {
  const Grid grid(1, 8.0, 320);
  const auto mu = DiscreteMeasure::from_density(gaussian_density_1d(0.1, 0.25), grid);
  const auto res = coarsen_support(mu, 64);
  REQUIRE(res.coarsened);
  CHECK(res.measure.size() <= 64);
  CHECK(res.measure.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.measure.mean().x == doctest::Approx(mu.mean().x).epsilon(1e-12));
  CHECK(res.mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.disp2 > 0.0);
  // disp1 = sum w*d, disp2 = sum w*d^2 with d <= radius, total mass 1.
  CHECK(res.disp2 <= res.radius * res.disp1 + 1e-15);
  CHECK(res.disp1 * res.disp1 <= res.disp2 * res.mass + 1e-15);

  // Moving each merged point back costs at most disp2 under the squared cost.
  const auto tr = transport_cost(mu, res.measure, CostFn::power(2.0), 1024);
  CHECK(tr.cost <= res.disp2 + 1e-12);
}
