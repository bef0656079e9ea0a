#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fpot/drift.hpp"
#include "fpot/fp_forward.hpp"
#include "fpot/measure.hpp"
#include "fpot/rescale.hpp"

using namespace fpot;

namespace {

Trajectory short_run(const DriftSpec& drift, double t_end) {
  const Grid grid(1, 8.0, 160);
  SolverConfig cfg;
  cfg.grid = grid;
  cfg.t_end = t_end;
  cfg.stride = 8;
  const auto mu0 = DiscreteMeasure::from_density(gaussian_density_1d(-0.5, 0.09), grid);
  return evolve(mu0, drift, cfg);
}

}  // namespace

TEST_CASE("rescaling at lambda zero keeps every frame") {
  const auto traj = short_run(DriftSpec::zero(1), 0.2);
  const auto res = rescale_trajectory(traj, 0.0);
  CHECK(res.s_frame);
  REQUIRE(res.frames.size() == traj.weights.size());
  for (std::size_t k = 0; k < res.frames.size(); ++k) {
    CHECK(res.times[k] == doctest::Approx(traj.times[k]).epsilon(1e-14));
    CHECK(res.frames[k].total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.frames[k].mean().x ==
          doctest::Approx(traj.measure_at(k).mean().x).epsilon(1e-12));
  }
}

TEST_CASE("rescaled frames dilate by the exponential factor") {
  const auto traj = short_run(DriftSpec::ou(1.0), 0.4);
  const double t = traj.times[traj.times.size() / 2];
  const auto rho = rho_at_time(traj, t);
  const auto sigma = sigma_at_s(traj, 1.0, s_of_t(t, 1.0));
  CHECK(sigma.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigma.mean().x == doctest::Approx(std::exp(t) * rho.mean().x).epsilon(1e-12));
  CHECK(sigma.axis_variance().x ==
        doctest::Approx(std::exp(2.0 * t) * rho.axis_variance().x).epsilon(1e-12));
}

TEST_CASE("time interpolation is linear between frames") {
  const auto traj = short_run(DriftSpec::zero(1), 0.2);
  REQUIRE(traj.times.size() >= 3);
  const auto hit = weights_at_time(traj, traj.times[2]);
  for (std::size_t i = 0; i < hit.size(); ++i)
    CHECK(hit[i] == doctest::Approx(traj.weights[2][i]).epsilon(1e-12));

  const double mid = 0.5 * (traj.times[1] + traj.times[2]);
  const auto blend = weights_at_time(traj, mid);
  for (std::size_t i = 0; i < blend.size(); ++i)
    CHECK(blend[i] ==
          doctest::Approx(0.5 * (traj.weights[1][i] + traj.weights[2][i])).epsilon(1e-12));

  CHECK_THROWS_AS(weights_at_time(traj, 0.5), std::out_of_range);
  CHECK_THROWS_AS(sigma_at_s(traj, 0.0, -0.1), std::out_of_range);
}

TEST_CASE("integrability transfer is an identity on frames") {
  Mat2 M;
  M.a11 = 2.0;
  const auto drift = DriftSpec::linear(M, {}, 1, 1.0);  // A(x) = x after the split
  const auto traj = short_run(drift, 0.3);
  const auto tc = integrability_transfer(traj, drift, traj.weights.size() / 2);
  CHECK(tc.sigma_side == doctest::Approx(tc.rho_side).epsilon(1e-12));

  const double a = drift_mass_integral_rescaled(traj, drift);
  const double b = drift_mass_integral_weighted(traj, drift);
  CHECK(a == doctest::Approx(b).epsilon(1e-5));
  CHECK(a > 0.0);
}
