#include "fpot/fp_forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fpot {
namespace {

struct FaceVelocities {
  // vx[iy * (n + 1) + ix] for the face left of cell column ix; boundary
  // faces stay zero (no flux). 1D uses the iy = 0 row only.
  std::vector<double> vx;
  std::vector<double> vy;  // vy[iy * n + ix] for the face below cell row iy
  double vmax = 0.0;
};

void fill_faces(const Grid& grid, const std::function<Vec(const Vec&)>& velocity,
                FaceVelocities& f) {
  const int n = grid.cells_per_axis();
  const double L = grid.half_extent();
  const double dx = grid.spacing();
  f.vmax = 0.0;
  if (grid.dim() == 1) {
    f.vx.assign(n + 1, 0.0);
    for (int k = 1; k < n; ++k) {
      f.vx[k] = velocity(Vec{-L + k * dx, 0.0}).x;
      f.vmax = std::max(f.vmax, std::abs(f.vx[k]));
    }
    return;
  }
  f.vx.assign(static_cast<std::size_t>(n) * (n + 1), 0.0);
  f.vy.assign(static_cast<std::size_t>(n + 1) * n, 0.0);
  for (int iy = 0; iy < n; ++iy) {
    const double yc = grid.axis_center(iy);
    for (int ix = 1; ix < n; ++ix) {
      const double v = velocity(Vec{-L + ix * dx, yc}).x;
      f.vx[static_cast<std::size_t>(iy) * (n + 1) + ix] = v;
      f.vmax = std::max(f.vmax, std::abs(v));
    }
  }
  for (int iy = 1; iy < n; ++iy) {
    const double yf = -L + iy * dx;
    for (int ix = 0; ix < n; ++ix) {
      const double v = velocity(Vec{grid.axis_center(ix), yf}).y;
      f.vy[static_cast<std::size_t>(iy) * n + ix] = v;
      f.vmax = std::max(f.vmax, std::abs(v));
    }
  }
}

void apply_step(const Grid& grid, const FaceVelocities& faces, double h, std::vector<double>& w,
                std::vector<double>& delta, double& min_weight) {
  const int n = grid.cells_per_axis();
  const double dx = grid.spacing();
  const double cdif = h / (dx * dx);
  const double cadv = h / dx;
  std::fill(delta.begin(), delta.end(), 0.0);
  if (grid.dim() == 1) {
    for (int i = 0; i + 1 < n; ++i) {
      const double v = faces.vx[i + 1];
      const double flux = cadv * (v > 0.0 ? v * w[i] : v * w[i + 1]) - cdif * (w[i + 1] - w[i]);
      delta[i] -= flux;
      delta[i + 1] += flux;
    }
  } else {
    for (int iy = 0; iy < n; ++iy) {
      const std::size_t row = static_cast<std::size_t>(iy) * n;
      for (int ix = 0; ix + 1 < n; ++ix) {
        const std::size_t i = row + ix;
        const double v = faces.vx[static_cast<std::size_t>(iy) * (n + 1) + ix + 1];
        const double flux = cadv * (v > 0.0 ? v * w[i] : v * w[i + 1]) - cdif * (w[i + 1] - w[i]);
        delta[i] -= flux;
        delta[i + 1] += flux;
      }
    }
    for (int iy = 0; iy + 1 < n; ++iy) {
      const std::size_t row = static_cast<std::size_t>(iy) * n;
      for (int ix = 0; ix < n; ++ix) {
        const std::size_t i = row + ix;
        const std::size_t j = i + n;
        const double v = faces.vy[static_cast<std::size_t>(iy + 1) * n + ix];
        const double flux = cadv * (v > 0.0 ? v * w[i] : v * w[j]) - cdif * (w[j] - w[i]);
        delta[i] -= flux;
        delta[j] += flux;
      }
    }
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] += delta[i];
    min_weight = std::min(min_weight, w[i]);
  }
}

double boundary_mass_of(const Grid& grid, const std::vector<double>& w) {
  const int n = grid.cells_per_axis();
  double m = 0.0;
  if (grid.dim() == 1) {
    m = w[0] + w[static_cast<std::size_t>(n) - 1];
  } else {
    for (int ix = 0; ix < n; ++ix) {
      m += w[static_cast<std::size_t>(ix)] + w[static_cast<std::size_t>(n - 1) * n + ix];
    }
    for (int iy = 1; iy + 1 < n; ++iy) {
      m += w[static_cast<std::size_t>(iy) * n] + w[static_cast<std::size_t>(iy) * n + n - 1];
    }
  }
  return m;
}

// Strict positivity bound: the total outflow fraction of any cell per step
// stays at or below 0.9.
double positivity_dt(const Grid& grid, double vmax) {
  const double dx = grid.spacing();
  const int d = grid.dim();
  return 0.9 / (2.0 * d / (dx * dx) + 2.0 * d * vmax / dx);
}

Trajectory run_scheme(std::vector<double> w0, const SolverConfig& cfg, double t0, double span,
                      const std::function<void(double, FaceVelocities&)>& faces_at,
                      bool faces_static, double vmax,
                      const std::function<double(const Vec&, double)>& drift_norm) {
  const Grid& grid = cfg.grid;
  if (grid.cells_per_axis() < 8) {
    throw std::invalid_argument("solver needs at least 8 cells per axis");
  }
  if (static_cast<std::size_t>(grid.cell_count()) != w0.size()) {
    throw std::invalid_argument("weight count does not match grid");
  }
  if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0) {
    throw std::invalid_argument("cfl safety must lie in (0, 1]");
  }
  if (cfg.stride < 0) throw std::invalid_argument("stride must be >= 0");
  if (!(span >= 0.0) || !std::isfinite(span)) {
    throw std::invalid_argument("final time must be finite and >= 0");
  }
  double mass0 = 0.0;
  for (double w : w0) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weights must be nonnegative");
    mass0 += w;
  }
  if (!(mass0 > 0.0)) throw std::invalid_argument("weights must carry mass");

  const double bound = admissible_dt(grid, vmax, cfg.cfl_safety);
  double dt_eff = cfg.dt;
  if (dt_eff > 0.0) {
    if (dt_eff > bound * (1.0 + 1e-12)) {
      throw std::invalid_argument("time step exceeds CFL bound; admissible dt = " +
                                  std::to_string(bound));
    }
  } else {
    dt_eff = bound;
  }
  dt_eff = std::min(dt_eff, positivity_dt(grid, vmax));

  Trajectory traj;
  traj.grid = grid;

  long long steps = 0;
  if (span > 0.0) {
    steps = std::max<long long>(1, static_cast<long long>(std::ceil(span / dt_eff - 1e-12)));
  }
  const double dt = steps > 0 ? span / steps : 0.0;
  traj.dt = dt;
  traj.steps = steps;

  std::vector<double> w = std::move(w0);
  std::vector<double> delta(w.size());
  traj.min_weight = *std::min_element(w.begin(), w.end());

  FaceVelocities faces;
  if (faces_static) faces_at(t0, faces);

  std::vector<double> drift_norm_per_frame;
  auto store_frame = [&](double t) {
    traj.times.push_back(t);
    traj.weights.push_back(w);
    traj.boundary_mass.push_back(boundary_mass_of(grid, w));
    double mass = 0.0;
    for (double v : w) mass += v;
    traj.mass_drift = std::max(traj.mass_drift, std::abs(mass - mass0));
    if (drift_norm) {
      double s = 0.0;
      for (int i = 0; i < grid.cell_count(); ++i) {
        const double wi = w[static_cast<std::size_t>(i)];
        if (wi != 0.0) s += wi * drift_norm(grid.center(i), t);
      }
      drift_norm_per_frame.push_back(s);
    }
  };

  const long long stride =
      cfg.stride > 0 ? cfg.stride : std::max<long long>(1, (steps + 1023) / 1024);

  store_frame(t0);
  for (long long k = 0; k < steps; ++k) {
    const double t = t0 + k * dt;
    if (!faces_static) faces_at(t, faces);
    apply_step(grid, faces, dt, w, delta, traj.min_weight);
    if ((k + 1) % stride == 0 || k + 1 == steps) store_frame(t0 + (k + 1) * dt);
  }

  for (std::size_t k = 0; k + 1 < drift_norm_per_frame.size(); ++k) {
    traj.drift_mass_integral += 0.5 * (traj.times[k + 1] - traj.times[k]) *
                                (drift_norm_per_frame[k] + drift_norm_per_frame[k + 1]);
  }
  for (double bm : traj.boundary_mass) {
    if (bm > 1e-3 * mass0) traj.domain_small = true;
  }
  return traj;
}

}  // namespace

DiscreteMeasure Trajectory::measure_at(std::size_t k) const {
  return measure_from_weights(grid, weights.at(k));
}

double admissible_dt(const Grid& grid, double vmax, double cfl_safety) {
  const double dx = grid.spacing();
  const int d = grid.dim();
  const double diff_bound = dx * dx / (2.0 * d);
  const double adv_bound = vmax > 0.0 ? dx / vmax : std::numeric_limits<double>::infinity();
  return cfl_safety * std::min(diff_bound, adv_bound);
}

Trajectory evolve_weights(std::vector<double> w0, const DriftSpec& drift,
                          const SolverConfig& cfg) {
  if (cfg.grid.dim() != drift.dim) throw std::invalid_argument("drift dimension mismatch");
  const VectorField velocity = drift.velocity_field();
  const VectorField a = drift.a_field();
  FaceVelocities probe;
  fill_faces(cfg.grid, velocity.eval, probe);
  auto faces_at = [&cfg, velocity](double, FaceVelocities& f) {
    fill_faces(cfg.grid, velocity.eval, f);
  };
  auto drift_norm = [a](const Vec& x, double) { return a(x).norm(); };
  return run_scheme(std::move(w0), cfg, 0.0, cfg.t_end, faces_at, true, probe.vmax, drift_norm);
}

Trajectory evolve(const DiscreteMeasure& rho0, const DriftSpec& drift, const SolverConfig& cfg) {
  return evolve_weights(weights_from_measure(cfg.grid, rho0), drift, cfg);
}

Trajectory evolve_rescaled_weights(std::vector<double> w0, const TimeField& a_tilde, double s0,
                                   double s1, const SolverConfig& cfg) {
  if (cfg.grid.dim() != a_tilde.dim) throw std::invalid_argument("drift dimension mismatch");
  if (!(s1 >= s0)) throw std::invalid_argument("rescaled interval must have s1 >= s0");
  // Velocity of the rescaled mass flow is -A~(., s).
  auto velocity_at = [&a_tilde](double s) {
    return [&a_tilde, s](const Vec& y) { return a_tilde(y, s) * -1.0; };
  };
  double vmax = 0.0;
  FaceVelocities probe;
  for (int k = 0; k <= 32; ++k) {
    const double s = s0 + (s1 - s0) * k / 32.0;
    fill_faces(cfg.grid, velocity_at(s), probe);
    vmax = std::max(vmax, probe.vmax);
  }
  auto faces_at = [&cfg, velocity_at](double s, FaceVelocities& f) {
    fill_faces(cfg.grid, velocity_at(s), f);
  };
  auto drift_norm = [&a_tilde](const Vec& y, double s) { return a_tilde(y, s).norm(); };
  return run_scheme(std::move(w0), cfg, s0, s1 - s0, faces_at, false, vmax, drift_norm);
}

Trajectory evolve_rescaled(const DiscreteMeasure& sigma0, const TimeField& a_tilde, double s0,
                           double s1, const SolverConfig& cfg) {
  return evolve_rescaled_weights(weights_from_measure(cfg.grid, sigma0), a_tilde, s0, s1, cfg);
}

std::vector<double> weights_from_density(const Grid& grid,
                                         const std::function<double(const Vec&)>& density) {
  std::vector<double> w(grid.cell_count());
  double total = 0.0;
  for (int i = 0; i < grid.cell_count(); ++i) {
    const double v = density(grid.center(i)) * grid.cell_volume();
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("density must be nonnegative");
    w[static_cast<std::size_t>(i)] = v;
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("degenerate density");
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> weights_from_measure(const Grid& grid, const DiscreteMeasure& mu) {
  if (grid.dim() != mu.dim()) throw std::invalid_argument("measure dimension mismatch");
  std::vector<double> w(grid.cell_count(), 0.0);
  const double tol = 1e-9 * grid.spacing();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Vec p = mu.points()[i];
    if (!grid.contains(p, 0.0)) throw std::invalid_argument("initial measure not on grid");
    const int ix = grid.axis_cell(p.x);
    const int iy = grid.dim() == 2 ? grid.axis_cell(p.y) : 0;
    const int flat = grid.flat_index(ix, iy);
    if (distance(grid.center(flat), p) > tol) {
      throw std::invalid_argument("initial measure not on grid");
    }
    w[static_cast<std::size_t>(flat)] += mu.weights()[i];
  }
  return w;
}

DiscreteMeasure measure_from_weights(const Grid& grid, const std::vector<double>& weights) {
  if (static_cast<std::size_t>(grid.cell_count()) != weights.size()) {
    throw std::invalid_argument("weight count does not match grid");
  }
  std::vector<Vec> pts;
  std::vector<double> w;
  pts.reserve(weights.size());
  w.reserve(weights.size());
  for (int i = 0; i < grid.cell_count(); ++i) {
    const double v = weights[static_cast<std::size_t>(i)];
    if (v != 0.0) {
      pts.push_back(grid.center(i));
      w.push_back(v);
    }
  }
  return DiscreteMeasure::from_weighted_points(pts, w, grid.dim(), false);
}

}  // namespace fpot
