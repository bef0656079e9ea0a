#pragma once

#include <vector>

#include "fpot/cost.hpp"
#include "fpot/drift.hpp"
#include "fpot/fp_forward.hpp"
#include "fpot/geometry.hpp"
#include "fpot/measure.hpp"

namespace fpot {

/// Solution of the dual equation d_s phi + Lap phi - drift . grad phi = 0,
/// integrated from final data at s1 down to s0 with the same upwind stencil
/// as the forward solver, so the discrete maximum principle is exact.
struct DualSolution {
  Grid grid{1, 1.0, 8};
  std::vector<double> s_values;          // ascending; front() = s0, back() = s1
  std::vector<std::vector<double>> phi;  // phi[k] on grid at s_values[k]
  std::vector<double> sup_norm;          // per frame, max |phi|
  std::vector<double> lip_seminorm;      // per frame, max |phi_j - phi_i| / dx over edges
  double dt = 0.0;
  long long steps = 0;

  const std::vector<double>& at_s0() const { return phi.front(); }
  const std::vector<double>& final_datum() const { return phi.back(); }
};

/// Explicit upwind march of the dual equation; cfg.dt of zero picks the
/// largest stable step. Throws on CFL violation like the forward solver.
DualSolution solve_backward(const std::vector<double>& phi_final, const TimeField& drift,
                            double s0, double s1, const SolverConfig& cfg);

/// Worst violation max phi1(x) + phi2(y) - h(|x - y|) over cell-center
/// pairs; negative means feasible with margin. 2D scans a stride-4 product
/// grid, then refines within two strides of the coarse maximizer.
double check_constraint_pair(const Grid& grid, const std::vector<double>& phi1,
                             const std::vector<double>& phi2, const CostFn& h);

/// int phi dmu with (bi)linear interpolation between cell centers, clamped
/// beyond the outermost centers. Throws "support outside grid".
double grid_pairing(const Grid& grid, const std::vector<double>& phi,
                    const DiscreteMeasure& mu);

/// int phi1 dmu1 + int phi2 dmu2.
double pairing_sigma(const Grid& grid, const std::vector<double>& phi1,
                     const std::vector<double>& phi2, const DiscreteMeasure& mu1,
                     const DiscreteMeasure& mu2);

/// Discrete Lipschitz seminorm: max over neighboring cells of |dphi| / dx.
double grid_lipschitz(const Grid& grid, const std::vector<double>& values);

/// Convex smoothing of a grid function: normalized bump-kernel average over
/// cells within radius_cells (indices clamped at walls). radius_cells = 0
/// returns the input. Values move at most radius_cells * dx in argument, so
/// a dual pair stays feasible after subtracting Lip(h) * radius_cells * dx.
std::vector<double> mollify_grid_function(const Grid& grid, const std::vector<double>& values,
                                          int radius_cells);

/// Drift substitution error per ladder entry: integral over [t0, t1] of
/// e^(lambda t) * sum over both trajectories of int |A_nm - A| d rho_t,
/// trapezoid over the stored frames inside the window. Equals the
/// rescaled-frame error int int |A~_nm - A~| d sigma_s ds that multiplies
/// the dual Lipschitz bound in the comparison chain.
std::vector<double> knm_error(const DriftSpec& drift, const std::vector<ApproxParams>& ladder,
                              const Trajectory& traj1, const Trajectory& traj2, double t0,
                              double t1);

}  // namespace fpot
