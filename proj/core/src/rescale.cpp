#include "fpot/rescale.hpp"

#include <cmath>
#include <stdexcept>

namespace fpot {
namespace {

std::size_t lower_frame(const std::vector<double>& times, double t, const char* what) {
  if (times.empty() || t < times.front() - 1e-12 || t > times.back() + 1e-12) {
    throw std::out_of_range(what);
  }
  std::size_t lo = 0;
  while (lo + 1 < times.size() && times[lo + 1] <= t) ++lo;
  return lo;
}

}  // namespace

MeasureTrajectory rescale_trajectory(const Trajectory& traj, double lambda) {
  MeasureTrajectory out;
  out.lambda = lambda;
  out.s_frame = true;
  out.times.reserve(traj.times.size());
  out.frames.reserve(traj.times.size());
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    out.times.push_back(s_of_t(t, lambda));
    DiscreteMeasure rho = traj.measure_at(k);
    out.frames.push_back(lambda == 0.0 ? rho : rho.pushforward_scale(std::exp(lambda * t)));
  }
  return out;
}

std::vector<double> weights_at_time(const Trajectory& traj, double t) {
  const std::size_t lo = lower_frame(traj.times, t, "requested time beyond trajectory range");
  if (lo + 1 == traj.times.size() || t <= traj.times[lo]) return traj.weights[lo];
  const double span = traj.times[lo + 1] - traj.times[lo];
  const double a = (traj.times[lo + 1] - t) / span;
  std::vector<double> w(traj.weights[lo].size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = a * traj.weights[lo][i] + (1.0 - a) * traj.weights[lo + 1][i];
  }
  return w;
}

DiscreteMeasure rho_at_time(const Trajectory& traj, double t) {
  return measure_from_weights(traj.grid, weights_at_time(traj, t));
}

DiscreteMeasure sigma_at_s(const Trajectory& traj, double lambda, double s) {
  double t = 0.0;
  try {
    t = t_of_s(s, lambda);
  } catch (const std::invalid_argument&) {
    throw std::out_of_range("requested s beyond trajectory range");
  }
  if (t < traj.times.front() - 1e-12 || t > traj.times.back() + 1e-12) {
    throw std::out_of_range("requested s beyond trajectory range");
  }
  DiscreteMeasure rho = rho_at_time(traj, t);
  return lambda == 0.0 ? rho : rho.pushforward_scale(std::exp(lambda * t));
}

TransferCheck integrability_transfer(const Trajectory& traj, const DriftSpec& drift,
                                     std::size_t frame) {
  const double t = traj.times.at(frame);
  const double lambda = drift.lambda;
  const double s = s_of_t(t, lambda);
  const VectorField a = drift.a_field();

  TransferCheck check;
  DiscreteMeasure rho = traj.measure_at(frame);
  const double factor = std::exp(lambda * t);
  DiscreteMeasure sigma = lambda == 0.0 ? rho : rho.pushforward_scale(factor);
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    check.sigma_side += sigma.weights()[i] * rescaled_drift(a, lambda, s, sigma.points()[i]).norm();
  }
  for (std::size_t i = 0; i < rho.size(); ++i) {
    check.rho_side += rho.weights()[i] * a(rho.points()[i]).norm();
  }
  check.rho_side *= std::exp(-lambda * t);
  return check;
}

double drift_mass_integral_rescaled(const Trajectory& traj, const DriftSpec& drift) {
  double total = 0.0;
  double prev_s = 0.0;
  double prev_v = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double s = s_of_t(traj.times[k], drift.lambda);
    const double v = integrability_transfer(traj, drift, k).sigma_side;
    if (k > 0) total += 0.5 * (s - prev_s) * (prev_v + v);
    prev_s = s;
    prev_v = v;
  }
  return total;
}

double drift_mass_integral_weighted(const Trajectory& traj, const DriftSpec& drift) {
  const VectorField a = drift.a_field();
  double total = 0.0;
  double prev_t = 0.0;
  double prev_v = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    DiscreteMeasure rho = traj.measure_at(k);
    double v = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      v += rho.weights()[i] * a(rho.points()[i]).norm();
    }
    v *= std::exp(drift.lambda * t);
    if (k > 0) total += 0.5 * (t - prev_t) * (prev_v + v);
    prev_t = t;
    prev_v = v;
  }
  return total;
}

}  // namespace fpot
