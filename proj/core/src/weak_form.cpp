#include "fpot/weak_form.hpp"

#include <cmath>
#include <stdexcept>

namespace fpot {
namespace {

double psi(double u) {
  const double s = 1.0 - u * u;
  return s > 0.0 ? s * s * s : 0.0;
}

double psi_d(double u) {
  const double s = 1.0 - u * u;
  return s > 0.0 ? -6.0 * u * s * s : 0.0;
}

double psi_dd(double u) {
  const double s = 1.0 - u * u;
  return s > 0.0 ? -6.0 * s * s + 24.0 * u * u * s : 0.0;
}

}  // namespace

TestFunction make_bump(const Vec& center, double radius, int dim) {
  if (!(radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
  TestFunction f;
  f.dim = dim;
  f.center = center;
  f.radius = radius;
  if (dim == 1) {
    f.value = [center, radius](const Vec& p) { return psi((p.x - center.x) / radius); };
    f.grad = [center, radius](const Vec& p) {
      return Vec{psi_d((p.x - center.x) / radius) / radius, 0.0};
    };
    f.laplacian = [center, radius](const Vec& p) {
      return psi_dd((p.x - center.x) / radius) / (radius * radius);
    };
  } else {
    f.value = [center, radius](const Vec& p) {
      return psi((p.x - center.x) / radius) * psi((p.y - center.y) / radius);
    };
    f.grad = [center, radius](const Vec& p) {
      const double ux = (p.x - center.x) / radius;
      const double uy = (p.y - center.y) / radius;
      return Vec{psi_d(ux) * psi(uy) / radius, psi(ux) * psi_d(uy) / radius};
    };
    f.laplacian = [center, radius](const Vec& p) {
      const double ux = (p.x - center.x) / radius;
      const double uy = (p.y - center.y) / radius;
      return (psi_dd(ux) * psi(uy) + psi(ux) * psi_dd(uy)) / (radius * radius);
    };
  }
  return f;
}

std::vector<TestFunction> default_test_functions(const Grid& grid) {
  const double L = grid.half_extent();
  const int dim = grid.dim();
  std::vector<TestFunction> fns;
  fns.push_back(make_bump({}, 0.85 * L, dim));
  fns.push_back(make_bump(Vec{0.3 * L, 0.0}, 0.5 * L, dim));
  fns.push_back(make_bump(Vec{-0.3 * L, 0.0}, 0.5 * L, dim));
  if (dim == 2) {
    fns.push_back(make_bump(Vec{0.0, 0.3 * L}, 0.5 * L, dim));
    fns.push_back(make_bump(Vec{0.25 * L, -0.25 * L}, 0.45 * L, dim));
  }
  return fns;
}

double SpaceTimeTestFunction::value(const Vec& x, double t) const {
  const double u = (2.0 * t - t0 - t1) / (t1 - t0);
  return space.value(x) * psi(u);
}

double SpaceTimeTestFunction::dt(const Vec& x, double t) const {
  const double u = (2.0 * t - t0 - t1) / (t1 - t0);
  return space.value(x) * psi_d(u) * 2.0 / (t1 - t0);
}

Vec SpaceTimeTestFunction::grad(const Vec& x, double t) const {
  const double u = (2.0 * t - t0 - t1) / (t1 - t0);
  return space.grad(x) * psi(u);
}

double SpaceTimeTestFunction::laplacian(const Vec& x, double t) const {
  const double u = (2.0 * t - t0 - t1) / (t1 - t0);
  return space.laplacian(x) * psi(u);
}

SpaceTimeTestFunction make_space_time_bump(const Vec& center, double radius, double t0, double t1,
                                           int dim) {
  if (!(t1 > t0)) throw std::invalid_argument("time window must have t1 > t0");
  return {make_bump(center, radius, dim), t0, t1};
}

double integrate(const DiscreteMeasure& mu, const std::function<double(const Vec&)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weights()[i] * f(mu.points()[i]);
  return s;
}

double integrate_cells(const Grid& grid, const std::vector<double>& weights,
                       const std::function<double(const Vec&)>& f) {
  if (static_cast<std::size_t>(grid.cell_count()) != weights.size()) {
    throw std::invalid_argument("weight count does not match grid");
  }
  double s = 0.0;
  for (int i = 0; i < grid.cell_count(); ++i) {
    if (weights[static_cast<std::size_t>(i)] != 0.0) {
      s += weights[static_cast<std::size_t>(i)] * f(grid.center(i));
    }
  }
  return s;
}

double weak_residual(const Trajectory& traj, const SpaceTimeTestFunction& zeta,
                     const DriftSpec& drift) {
  const Grid& grid = traj.grid;
  const double L = grid.half_extent();
  const Vec c = zeta.space.center;
  const double r = zeta.space.radius;
  const bool touches = (std::abs(c.x) + r >= L) || (grid.dim() == 2 && std::abs(c.y) + r >= L);
  if (touches) {
    throw std::invalid_argument("test function not compactly supported in domain");
  }
  auto frame_integrand = [&](std::size_t k) {
    const double t = traj.times[k];
    double s = 0.0;
    for (int i = 0; i < grid.cell_count(); ++i) {
      const double w = traj.weights[k][static_cast<std::size_t>(i)];
      if (w == 0.0) continue;
      const Vec p = grid.center(i);
      s += w * (zeta.dt(p, t) + zeta.laplacian(p, t) - drift.B(p).dot(zeta.grad(p, t)));
    }
    return s;
  };
  double total = 0.0;
  double prev = frame_integrand(0);
  for (std::size_t k = 1; k < traj.times.size(); ++k) {
    const double cur = frame_integrand(k);
    total += 0.5 * (traj.times[k] - traj.times[k - 1]) * (prev + cur);
    prev = cur;
  }
  return total;
}

double generator_integral(const Grid& grid, const std::vector<double>& weights,
                          const TestFunction& phi, const VectorField& drift_b) {
  if (static_cast<std::size_t>(grid.cell_count()) != weights.size()) {
    throw std::invalid_argument("weight count does not match grid");
  }
  double s = 0.0;
  for (int i = 0; i < grid.cell_count(); ++i) {
    const double w = weights[static_cast<std::size_t>(i)];
    if (w == 0.0) continue;
    const Vec p = grid.center(i);
    s += w * (phi.laplacian(p) - phi.grad(p).dot(drift_b(p)));
  }
  return s;
}

std::vector<double> weak_form_residuals(const Trajectory& traj, const VectorField& drift_b,
                                        const TestFunction& phi) {
  std::vector<double> out;
  if (traj.times.size() < 2) return out;
  auto moment = [&](std::size_t k) {
    return integrate_cells(traj.grid, traj.weights[k], phi.value);
  };
  double prev_moment = moment(0);
  double prev_gen = generator_integral(traj.grid, traj.weights[0], phi, drift_b);
  for (std::size_t k = 1; k < traj.times.size(); ++k) {
    const double cur_moment = moment(k);
    const double cur_gen = generator_integral(traj.grid, traj.weights[k], phi, drift_b);
    const double dt = traj.times[k] - traj.times[k - 1];
    out.push_back(std::abs(cur_moment - prev_moment - 0.5 * dt * (prev_gen + cur_gen)));
    prev_moment = cur_moment;
    prev_gen = cur_gen;
  }
  return out;
}

}  // namespace fpot
