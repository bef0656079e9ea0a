#pragma once

#include <functional>
#include <vector>

#include "fpot/drift.hpp"
#include "fpot/geometry.hpp"
#include "fpot/measure.hpp"

namespace fpot {

struct SolverConfig {
  Grid grid{1, 1.0, 8};
  double dt = 0.0;  // 0 picks the largest positivity-preserving step
  double t_end = 0.0;
  double cfl_safety = 0.3;
  int stride = 1;  // frames kept every stride steps (plus first and last);
                   // 0 picks a stride capping stored frames near 1024
};

/// Snapshots of a conservative explicit finite-volume solve of
/// d/dt rho = Lap rho + div(rho B) with no-flux walls. Cell values are
/// masses (density times cell volume), so every frame sums to the initial
/// mass up to roundoff.
struct Trajectory {
  Grid grid{1, 1.0, 8};
  std::vector<double> times;
  std::vector<std::vector<double>> weights;
  double dt = 0.0;
  long long steps = 0;
  double min_weight = 0.0;            // most negative cell mass ever seen
  double mass_drift = 0.0;            // max |mass(frame) - mass(0)|
  std::vector<double> boundary_mass;  // per frame, mass in wall cells
  bool domain_small = false;          // any boundary mass > 1e-3
  double drift_mass_integral = 0.0;   // integral of |A| d mu dt (trapezoid)

  const std::vector<double>& at(std::size_t k) const { return weights[k]; }
  DiscreteMeasure measure_at(std::size_t k) const;
};

/// Largest admissible step for the grid and peak transport speed:
/// cfl_safety * min(dx^2 / (2 dim), dx / vmax).
double admissible_dt(const Grid& grid, double vmax, double cfl_safety);

/// Explicit upwind + centered-diffusion evolution of an initial measure whose
/// support lies on grid cell centers. Throws when cfg.dt exceeds the
/// admissible bound (the message carries the bound).
Trajectory evolve(const DiscreteMeasure& rho0, const DriftSpec& drift, const SolverConfig& cfg);

/// Same starting from raw cell masses.
Trajectory evolve_weights(std::vector<double> w0, const DriftSpec& drift,
                          const SolverConfig& cfg);

/// Same scheme with a time-dependent drift field over s in [s0, s1]; the
/// CFL speed is sampled across the interval. The drift enters the equation
/// as d/ds sigma = Lap sigma + div(sigma a_tilde).
Trajectory evolve_rescaled(const DiscreteMeasure& sigma0, const TimeField& a_tilde, double s0,
                           double s1, const SolverConfig& cfg);

Trajectory evolve_rescaled_weights(std::vector<double> w0, const TimeField& a_tilde, double s0,
                                   double s1, const SolverConfig& cfg);

/// Cell masses of a density sampled at cell centers, normalized to unit mass.
std::vector<double> weights_from_density(const Grid& grid,
                                         const std::function<double(const Vec&)>& density);

/// Cell masses of a measure whose points must sit on cell centers.
std::vector<double> weights_from_measure(const Grid& grid, const DiscreteMeasure& mu);

/// Point measure on the cell centers carrying the given masses; cells with
/// exactly zero mass are dropped.
DiscreteMeasure measure_from_weights(const Grid& grid, const std::vector<double>& weights);

}  // namespace fpot
