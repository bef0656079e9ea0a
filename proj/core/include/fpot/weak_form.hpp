#pragma once

#include <functional>
#include <vector>

#include "fpot/drift.hpp"
#include "fpot/fp_forward.hpp"
#include "fpot/geometry.hpp"
#include "fpot/measure.hpp"

namespace fpot {

/// Compactly supported C^2 test function with exact derivatives, supported
/// on the box center +- radius (per axis).
struct TestFunction {
  int dim = 1;
  Vec center;
  double radius = 1.0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<double(const Vec&)> laplacian;
};

/// Product bump ((1 - u^2)^3 per axis) supported on the box of the given
/// radius around the center.
TestFunction make_bump(const Vec& center, double radius, int dim);

/// Deterministic family of bumps covering the grid box: one wide centered
/// bump plus offset ones per axis.
std::vector<TestFunction> default_test_functions(const Grid& grid);

/// Space-time test function zeta(x, t) = phi(x) chi(t) with chi a C^2 bump
/// vanishing outside (t0, t1); all derivatives closed form.
struct SpaceTimeTestFunction {
  TestFunction space;
  double t0 = 0.0;
  double t1 = 1.0;

  double value(const Vec& x, double t) const;
  double dt(const Vec& x, double t) const;
  Vec grad(const Vec& x, double t) const;
  double laplacian(const Vec& x, double t) const;
};

SpaceTimeTestFunction make_space_time_bump(const Vec& center, double radius, double t0, double t1,
                                           int dim);

double integrate(const DiscreteMeasure& mu, const std::function<double(const Vec&)>& f);
double integrate_cells(const Grid& grid, const std::vector<double>& weights,
                       const std::function<double(const Vec&)>& f);

/// Quadrature of the distributional identity over the whole trajectory:
/// integral of (dt zeta + Lap zeta - B . grad zeta) d mu_t dt, trapezoidal in
/// time, exact on frames in space. Near zero for a valid solve. Throws
/// "test function not compactly supported in domain" when the spatial
/// support reaches the box walls.
double weak_residual(const Trajectory& traj, const SpaceTimeTestFunction& zeta,
                     const DriftSpec& drift);

/// Right-hand side of the weak equation: integral of (Lap phi - grad phi . B).
double generator_integral(const Grid& grid, const std::vector<double>& weights,
                          const TestFunction& phi, const VectorField& drift_b);

/// One entry per snapshot interval: |(integral of phi moved across the
/// interval) - trapezoidal generator integral|. Small residuals certify the
/// solved trajectory solves the equation in the weak sense.
std::vector<double> weak_form_residuals(const Trajectory& traj, const VectorField& drift_b,
                                        const TestFunction& phi);

}  // namespace fpot
