#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "fpot/geometry.hpp"
#include "fpot/rescale.hpp"
#include "fpot/time_map.hpp"

using namespace fpot;

TEST_CASE("vector arithmetic") {
  const Vec a{1.0, 2.0};
  const Vec b{-0.5, 1.5};
  CHECK((a + b).x == doctest::Approx(0.5));
  CHECK((a - b).y == doctest::Approx(0.5));
  CHECK((2.0 * a).y == doctest::Approx(4.0));
  CHECK(a.dot(b) == doctest::Approx(2.5));
  CHECK(a.norm2() == doctest::Approx(5.0));
  CHECK(distance(a, b) == doctest::Approx(std::sqrt(0.25 + 0.25)));
  Vec c = a;
  c += b;
  CHECK(c.x == doctest::Approx(0.5));
}

TEST_CASE("matrix apply and smallest symmetric eigenvalue") {
  const Mat2 rot{0.0, 1.0, -1.0, 0.0};
  const Vec v = rot.apply({1.0, 2.0});
  CHECK(v.x == doctest::Approx(2.0));
  CHECK(v.y == doctest::Approx(-1.0));
  CHECK(rot.sym_min_eig() == doctest::Approx(0.0));

  const Mat2 diag{1.0, 0.0, 0.0, 2.0};
  CHECK(diag.sym_min_eig() == doctest::Approx(1.0));

  const Mat2 shear{1.0, 3.0, 0.0, 1.0};
  CHECK(shear.sym_min_eig() == doctest::Approx(-0.5));
}

TEST_CASE("grid layout") {
  const Grid g1(1, 8.0, 320);
  CHECK(g1.spacing() == doctest::Approx(0.05));
  CHECK(g1.cell_volume() == doctest::Approx(0.05));
  CHECK(g1.cell_count() == 320);
  CHECK(g1.axis_center(0) == doctest::Approx(-7.975));
  CHECK(g1.axis_center(319) == doctest::Approx(7.975));

  const Grid g2(2, 1.0, 4);
  CHECK(g2.cell_count() == 16);
  CHECK(g2.cell_volume() == doctest::Approx(0.25));
  CHECK(g2.flat_index(1, 1) == 5);
  const Vec c = g2.center(5);
  CHECK(c.x == doctest::Approx(-0.25));
  CHECK(c.y == doctest::Approx(-0.25));
  CHECK(g2.centers().size() == 16);

  CHECK(g1.contains({7.9}));
  CHECK_FALSE(g1.contains({8.0}));
  CHECK_FALSE(g1.contains({7.9}, 0.2));
  CHECK(g1.axis_cell(-100.0) == 0);
  CHECK(g1.axis_cell(100.0) == 319);
  CHECK(g1.axis_cell(g1.axis_center(17)) == 17);
}

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(Grid(3, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1, 0.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(Grid(1, 1.0, 1), std::invalid_argument);
}

TEST_CASE("time rescaling map") {
  CHECK(s_of_t(0.7, 0.0) == 0.7);
  CHECK(t_of_s(0.7, 0.0) == 0.7);
  CHECK(s_infinity(0.0) == std::numeric_limits<double>::infinity());
  CHECK(s_infinity(1.0) == std::numeric_limits<double>::infinity());

  const TimeMap plus(1.0);
  CHECK(plus.s_of(1.0) == doctest::Approx(std::expm1(2.0) / 2.0).epsilon(1e-14));
  CHECK(plus.t_of(plus.s_of(0.7)) == doctest::Approx(0.7).epsilon(1e-13));

  const TimeMap minus(-1.0);
  CHECK(minus.s_end == doctest::Approx(0.5));
  CHECK(minus.s_of(0.2) < 0.5);
  CHECK(minus.t_of(minus.s_of(0.2)) == doctest::Approx(0.2).epsilon(1e-13));
  CHECK_THROWS_AS(minus.t_of(0.5), std::invalid_argument);
  CHECK_THROWS_AS(minus.t_of(-0.1), std::invalid_argument);
}
