#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "fpot/drift.hpp"

using namespace fpot;

TEST_CASE("drift preset parsing") {
  const auto zero = DriftSpec::parse("zero", 1, 0.0);
  CHECK(zero.B({1.3}).x == 0.0);

  const auto ou = DriftSpec::parse("ou", 1, 1.0);
  CHECK(ou.B({0.7}).x == doctest::Approx(0.7));
  CHECK(ou.A({0.7}).x == doctest::Approx(0.0));

  const auto sg = DriftSpec::parse("sign", 1, 0.0);
  CHECK(sg.B({2.0}).x == doctest::Approx(1.0));
  CHECK(sg.B({-0.5}).x == doctest::Approx(-1.0));
  CHECK(sg.B({0.0}).x == 0.0);
  CHECK_THROWS_AS(DriftSpec::parse("sign", 2, 0.0), std::invalid_argument);

  const auto rot = DriftSpec::parse("rotation:2", 2, 0.0);
  const Vec r = rot.B({1.0, 0.0});
  CHECK(r.x == doctest::Approx(0.0));
  CHECK(r.y == doctest::Approx(-2.0));
  CHECK_THROWS_AS(DriftSpec::parse("rotation", 1, 0.0), std::invalid_argument);

  const auto gp = DriftSpec::parse("grad_power:3,2", 1, 0.0);
  CHECK(gp.B({1.5}).x == doctest::Approx(4.5));

  const auto l1 = DriftSpec::parse("linear:2", 1, 0.0);
  CHECK(l1.B({0.5}).x == doctest::Approx(1.0));
  const auto l1b = DriftSpec::parse("linear:1;0.5", 1, 0.0);
  CHECK(l1b.B({1.0}).x == doctest::Approx(1.5));
  const auto l2 = DriftSpec::parse("linear:0,1,-1,0", 2, 0.0);
  const Vec w = l2.B({1.0, 2.0});
  CHECK(w.x == doctest::Approx(2.0));
  CHECK(w.y == doctest::Approx(-1.0));
}

TEST_CASE("linear drift validates the declared monotonicity") {
  const Mat2 M{1.0, 0.0, 0.0, 2.0};
  CHECK_NOTHROW(DriftSpec::linear(M, {}, 2, 0.5));
  CHECK_THROWS_AS(DriftSpec::linear(M, {}, 2, 1.5), std::invalid_argument);
}

TEST_CASE("sampled monotonicity check") {
  const auto ou = DriftSpec::ou(1.0, 1);
  const auto rep = check_lambda_monotone(ou.b_field(), 1.0, 200, 3.0, 1);
  CHECK(rep.passed);
  CHECK(rep.worst_ratio == doctest::Approx(1.0).epsilon(1e-9));

  const auto rot = DriftSpec::rotation(1.0);
  const auto rrep = check_lambda_monotone(rot.b_field(), 0.0, 200, 3.0, 1);
  CHECK(rrep.passed);
  CHECK(std::abs(rrep.worst_ratio) <= 1e-9);

  const auto bad = DriftSpec::custom_field(1, [](const Vec& x) { return Vec{-x.x}; }, 0.0);
  CHECK_FALSE(check_lambda_monotone(bad.b_field(), 0.0, 200, 3.0, 1).passed);
}

TEST_CASE("resolvent and yosida closed forms") {
  const VectorField ident{1, [](const Vec& x) { return x; }};
  CHECK(resolvent(ident, 1.0, {2.0}).x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(yosida(ident, 4.0, {2.0}).x == doctest::Approx(1.6).epsilon(1e-9));

  const VectorField triple{1, [](const Vec& x) { return 3.0 * x; }};
  CHECK(yosida(triple, 6.0, {1.0}).x == doctest::Approx(2.0).epsilon(1e-9));

  const auto sg = DriftSpec::sign().a_field();
  CHECK(yosida(sg, 10.0, {0.05}).x == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(yosida(sg, 10.0, {0.5}).x == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(yosida(sg, 10.0, {-0.05}).x == doctest::Approx(-0.5).epsilon(1e-9));

  // Componentwise linear field in two dimensions.
  const VectorField diag{2, [](const Vec& v) { return Vec{v.x, 2.0 * v.y}; }};
  const Vec y = yosida(diag, 8.0, {1.0, 1.0});
  CHECK(y.x == doctest::Approx(8.0 / 9.0).epsilon(1e-9));
  CHECK(y.y == doctest::Approx(1.6).epsilon(1e-9));
}

TEST_CASE("capped yosida lands on the ball") {
  const VectorField steep{1, [](const Vec& x) { return 5.0 * x; }};
  CHECK(std::abs(yosida_capped(steep, 2.0, {10.0}).x) == doctest::Approx(2.0).epsilon(1e-9));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-4.0, 4.0);
  const auto sg = DriftSpec::sign().a_field();
  for (int i = 0; i < 200; ++i) {
    const Vec x{U(rng)};
    const double v = std::abs(yosida_capped(sg, 8.0, x).x);
    CHECK(v <= std::min(sg(x).norm(), 8.0) + 1e-12);
  }
}

TEST_CASE("smooth bounded approximation respects the yosida envelope") {
  const auto params = ApproxParams::make(8, 1);
  CHECK(params.beta == doctest::Approx(0.125));
  const auto sg = DriftSpec::sign().a_field();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const Vec x{U(rng)};
    const Vec an = smooth_bounded_approx(sg, params, x);
    CHECK(an.norm() <= std::min(sg(x).norm(), 8.0) + params.beta + 1e-9);
    CHECK((an - yosida_capped(sg, 8.0, x)).norm() <= params.beta + 1e-9);
  }
}

TEST_CASE("radial smoothing is exact on constants and first order in 1/m") {
  const VectorField c{1, [](const Vec&) { return Vec{0.7}; }};
  CHECK(radial_smooth(c, 5, {1.3}).x == doctest::Approx(0.7).epsilon(1e-9));

  const VectorField f{1, [](const Vec& x) { return Vec{std::tanh(3.0 * x.x)}; }};
  for (double x : {0.4, -1.1}) {
    double prev = std::abs(radial_smooth(f, 4, {x}).x - std::tanh(3.0 * x));
    for (int m : {8, 16, 32}) {
      const double err = std::abs(radial_smooth(f, m, {x}).x - std::tanh(3.0 * x));
      CHECK(err <= 0.75 * prev + 1e-12);
      prev = err;
    }
  }
}

TEST_CASE("tabulated field interpolates linearly and guards its domain") {
  const auto lin = DriftSpec::ou(1.0, 1).b_field();
  const TabulatedField tab(lin, 1, 2.0, 65);
  CHECK(tab({0.73}).x == doctest::Approx(0.73).epsilon(1e-12));
  CHECK_THROWS_AS(tab({2.5}), std::out_of_range);
}

TEST_CASE("ladder field keeps the truncation bound") {
  const auto ladder =
      build_ladder_field(DriftSpec::sign().a_field(), ApproxParams::make(16, 4), 6.0);
  CHECK(ladder.params.n == 16);
  for (double x : {-2.0, -0.3, 0.0, 0.4, 3.5}) {
    CHECK(std::abs(ladder({x}).x) <= 1.0 + ladder.params.beta + 1e-9);
  }
}

TEST_CASE("rescaled drift at lambda zero is the field itself") {
  const auto A = DriftSpec::sign().a_field();
  CHECK(rescaled_drift(A, 0.0, 0.37, {0.5}).x == doctest::Approx(A({0.5}).x));
  const auto tf = rescaled_field(A, 0.0);
  CHECK_FALSE(tf.time_dependent);
  CHECK(tf({0.5}, 0.2).x == doctest::Approx(1.0));
}

TEST_CASE("mollifier first moment is a small positive constant") {
  CHECK(mollifier_first_moment(1) > 0.0);
  CHECK(mollifier_first_moment(1) < 1.0);
  CHECK(mollifier_first_moment(2) > 0.0);
  CHECK(mollifier_first_moment(2) < 1.0);
}
