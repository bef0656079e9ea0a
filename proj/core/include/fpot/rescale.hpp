#pragma once

#include <cstddef>
#include <vector>

#include "fpot/drift.hpp"
#include "fpot/fp_forward.hpp"
#include "fpot/measure.hpp"
#include "fpot/time_map.hpp"

namespace fpot {

/// The time change s(t) = (e^{2 lambda t} - 1) / (2 lambda) and its inverse,
/// with s(t) = t at lambda = 0.
struct TimeMap {
  double lambda = 0.0;
  double s_end = 0.0;  // supremum of the rescaled time range

  explicit TimeMap(double lam) : lambda(lam), s_end(s_infinity(lam)) {}
  double s_of(double t) const { return s_of_t(t, lambda); }
  double t_of(double s) const { return t_of_s(s, lambda); }
};

/// Trajectory whose frames are free point clouds (supports leave the grid
/// lattice after rescaling).
struct MeasureTrajectory {
  double lambda = 0.0;
  bool s_frame = false;  // when true, times hold rescaled times s
  std::vector<double> times;
  std::vector<DiscreteMeasure> frames;
};

/// Pushes every frame rho_t to sigma_s = (e^{lambda t} id)# rho_t and
/// reindexes by s = s(t). lambda = 0 leaves frames identical.
MeasureTrajectory rescale_trajectory(const Trajectory& traj, double lambda);

/// Cell masses at an intermediate time, linear between stored frames.
/// Throws "requested time beyond trajectory range" outside [t_first, t_last].
std::vector<double> weights_at_time(const Trajectory& traj, double t);

DiscreteMeasure rho_at_time(const Trajectory& traj, double t);

/// sigma_s built from the interpolated frame at t(s). Throws
/// "requested s beyond trajectory range" when t(s) is not covered.
DiscreteMeasure sigma_at_s(const Trajectory& traj, double lambda, double s);

/// Both sides of the frame-wise change-of-variables identity
/// integral |A~(., s)| d sigma_s = e^{-lambda t} integral |A| d rho_t,
/// which holds exactly on discrete frames.
struct TransferCheck {
  double sigma_side = 0.0;
  double rho_side = 0.0;
};

TransferCheck integrability_transfer(const Trajectory& traj, const DriftSpec& drift,
                                     std::size_t frame);

/// Trapezoid over s of integral |A~| d sigma_s.
double drift_mass_integral_rescaled(const Trajectory& traj, const DriftSpec& drift);

/// Trapezoid over t of e^{lambda t} integral |A| d rho_t: the image of the
/// rescaled integral under the change of variables.
double drift_mass_integral_weighted(const Trajectory& traj, const DriftSpec& drift);

}  // namespace fpot
