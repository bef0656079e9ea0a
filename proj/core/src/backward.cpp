#include "fpot/backward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fpot {
namespace {

void fill_velocities(const Grid& grid, const TimeField& drift, double s, std::vector<Vec>& out) {
  const int cells = grid.cell_count();
  out.resize(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) out[static_cast<std::size_t>(i)] = drift(grid.center(i), s);
}

double max_axis_speed(const std::vector<Vec>& vel, int dim) {
  double vmax = 0.0;
  for (const Vec& v : vel) {
    vmax = std::max(vmax, std::abs(v.x));
    if (dim == 2) vmax = std::max(vmax, std::abs(v.y));
  }
  return vmax;
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// One explicit step written as phi_i + sum of nonnegative coefficients times
// neighbor differences; with total coefficient <= 0.9 the discrete maximum
// principle holds exactly in floating point.
void step_dual(const Grid& grid, const std::vector<Vec>& vel, double dt,
               const std::vector<double>& w, std::vector<double>& out) {
  const int n = grid.cells_per_axis();
  const double dx = grid.spacing();
  const double cd = dt / (dx * dx);
  const double ca = dt / dx;
  if (grid.dim() == 1) {
    for (int i = 0; i < n; ++i) {
      const double dm = i > 0 ? w[i - 1] - w[i] : 0.0;
      const double dp = i < n - 1 ? w[i + 1] - w[i] : 0.0;
      const double a = vel[i].x;
      double cm = cd, cp = cd;
      if (a > 0.0) {
        cm += a * ca;
      } else {
        cp -= a * ca;
      }
      out[i] = w[i] + cm * dm + cp * dp;
    }
    return;
  }
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int i = iy * n + ix;
      const double dxm = ix > 0 ? w[i - 1] - w[i] : 0.0;
      const double dxp = ix < n - 1 ? w[i + 1] - w[i] : 0.0;
      const double dym = iy > 0 ? w[i - n] - w[i] : 0.0;
      const double dyp = iy < n - 1 ? w[i + n] - w[i] : 0.0;
      const Vec a = vel[i];
      double cxm = cd, cxp = cd, cym = cd, cyp = cd;
      if (a.x > 0.0) {
        cxm += a.x * ca;
      } else {
        cxp -= a.x * ca;
      }
      if (a.y > 0.0) {
        cym += a.y * ca;
      } else {
        cyp -= a.y * ca;
      }
      out[i] = w[i] + cxm * dxm + cxp * dxp + cym * dym + cyp * dyp;
    }
  }
}

}  // namespace

DualSolution solve_backward(const std::vector<double>& phi_final, const TimeField& drift,
                            double s0, double s1, const SolverConfig& cfg) {
  const Grid& grid = cfg.grid;
  const int n = grid.cells_per_axis();
  const int cells = grid.cell_count();
  const int d = grid.dim();
  if (n < 8) throw std::invalid_argument("solver needs at least 8 cells per axis");
  if (static_cast<int>(phi_final.size()) != cells) {
    throw std::invalid_argument("dual data size mismatch");
  }
  if (drift.dim != d) throw std::invalid_argument("drift dimension mismatch");
  if (!std::isfinite(s0) || !std::isfinite(s1) || !(s1 >= s0)) {
    throw std::invalid_argument("backward interval must have s1 >= s0");
  }
  if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0) {
    throw std::invalid_argument("cfl safety must lie in (0, 1]");
  }
  if (cfg.stride < 0) throw std::invalid_argument("stride must be >= 0");
  for (double v : phi_final) {
    if (!std::isfinite(v)) throw std::invalid_argument("dual data must be finite");
  }

  const double dx = grid.spacing();
  const double span = s1 - s0;

  std::vector<Vec> vel;
  double vmax = 0.0;
  if (drift.time_dependent && span > 0.0) {
    for (int k = 0; k <= 32; ++k) {
      fill_velocities(grid, drift, s1 - span * k / 32.0, vel);
      vmax = std::max(vmax, max_axis_speed(vel, d));
    }
  } else {
    fill_velocities(grid, drift, s1, vel);
    vmax = max_axis_speed(vel, d);
  }

  DualSolution out;
  out.grid = grid;
  if (span == 0.0) {
    out.s_values = {s0};
    out.phi = {phi_final};
    out.sup_norm = {sup_abs(phi_final)};
    out.lip_seminorm = {grid_lipschitz(grid, phi_final)};
    return out;
  }

  const double bound = admissible_dt(grid, vmax, cfg.cfl_safety);
  if (cfg.dt > 0.0 && cfg.dt > bound * (1.0 + 1e-12)) {
    throw std::invalid_argument("time step exceeds CFL bound; admissible dt = " +
                                std::to_string(bound));
  }
  const double stable = 0.9 / (2.0 * d / (dx * dx) + d * vmax / dx);
  const double dt_eff = std::min(cfg.dt > 0.0 ? cfg.dt : bound, stable);

  long long steps = static_cast<long long>(std::ceil(span / dt_eff - 1e-12));
  steps = std::max<long long>(steps, 1);
  const double dt = span / static_cast<double>(steps);

  const long long stride =
      cfg.stride > 0 ? cfg.stride : std::max<long long>(1, (steps + 1023) / 1024);

  std::vector<double> w = phi_final;
  std::vector<double> next(static_cast<std::size_t>(cells));
  std::vector<double> s_frames{s1};
  std::vector<std::vector<double>> frames{w};
  for (long long k = 0; k < steps; ++k) {
    const double s_now = s1 - dt * static_cast<double>(k);
    if (drift.time_dependent) fill_velocities(grid, drift, s_now, vel);
    step_dual(grid, vel, dt, w, next);
    w.swap(next);
    if ((k + 1) % stride == 0 || k + 1 == steps) {
      s_frames.push_back(k + 1 == steps ? s0 : s1 - dt * static_cast<double>(k + 1));
      frames.push_back(w);
    }
  }

  std::reverse(s_frames.begin(), s_frames.end());
  std::reverse(frames.begin(), frames.end());
  out.s_values = std::move(s_frames);
  out.phi = std::move(frames);
  out.dt = dt;
  out.steps = steps;
  out.sup_norm.reserve(out.phi.size());
  out.lip_seminorm.reserve(out.phi.size());
  for (const auto& frame : out.phi) {
    out.sup_norm.push_back(sup_abs(frame));
    out.lip_seminorm.push_back(grid_lipschitz(grid, frame));
  }
  return out;
}

double check_constraint_pair(const Grid& grid, const std::vector<double>& phi1,
                             const std::vector<double>& phi2, const CostFn& h) {
  const int cells = grid.cell_count();
  if (static_cast<int>(phi1.size()) != cells || static_cast<int>(phi2.size()) != cells) {
    throw std::invalid_argument("dual data size mismatch");
  }
  const auto violation = [&](int i, int j) {
    return phi1[i] + phi2[j] - h(distance(grid.center(i), grid.center(j)));
  };
  double worst = -std::numeric_limits<double>::infinity();
  if (grid.dim() == 1) {
    for (int i = 0; i < cells; ++i) {
      for (int j = 0; j < cells; ++j) worst = std::max(worst, violation(i, j));
    }
    return worst;
  }
  const int n = grid.cells_per_axis();
  std::vector<int> coarse;
  for (int i = 0; i < n; i += 4) coarse.push_back(i);
  if (coarse.back() != n - 1) coarse.push_back(n - 1);
  int bx1 = 0, by1 = 0, bx2 = 0, by2 = 0;
  for (int x1 : coarse) {
    for (int y1 : coarse) {
      const int i = grid.flat_index(x1, y1);
      for (int x2 : coarse) {
        for (int y2 : coarse) {
          const double v = violation(i, grid.flat_index(x2, y2));
          if (v > worst) {
            worst = v;
            bx1 = x1;
            by1 = y1;
            bx2 = x2;
            by2 = y2;
          }
        }
      }
    }
  }
  const auto lo = [n](int c) { return std::max(0, c - 8); };
  const auto hi = [n](int c) { return std::min(n - 1, c + 8); };
  for (int x1 = lo(bx1); x1 <= hi(bx1); ++x1) {
    for (int y1 = lo(by1); y1 <= hi(by1); ++y1) {
      const int i = grid.flat_index(x1, y1);
      for (int x2 = lo(bx2); x2 <= hi(bx2); ++x2) {
        for (int y2 = lo(by2); y2 <= hi(by2); ++y2) {
          worst = std::max(worst, violation(i, grid.flat_index(x2, y2)));
        }
      }
    }
  }
  return worst;
}

double grid_pairing(const Grid& grid, const std::vector<double>& phi,
                    const DiscreteMeasure& mu) {
  if (static_cast<int>(phi.size()) != grid.cell_count()) {
    throw std::invalid_argument("dual data size mismatch");
  }
  if (mu.dim() != grid.dim()) throw std::invalid_argument("measure dimension mismatch");
  const int n = grid.cells_per_axis();
  const double dx = grid.spacing();
  const double L = grid.half_extent();
  const double c0 = grid.axis_center(0);
  const auto axis_interp = [&](double x, int& i0, double& t) {
    const double u = (x - c0) / dx;
    i0 = std::clamp(static_cast<int>(std::floor(u)), 0, n - 2);
    t = std::clamp(u - static_cast<double>(i0), 0.0, 1.0);
  };
  double acc = 0.0;
  for (std::size_t p = 0; p < mu.size(); ++p) {
    const Vec& x = mu.points()[p];
    const double w = mu.weights()[p];
    if (std::abs(x.x) > L + 1e-9 || (grid.dim() == 2 && std::abs(x.y) > L + 1e-9)) {
      throw std::invalid_argument("support outside grid");
    }
    int ix;
    double tx;
    axis_interp(x.x, ix, tx);
    if (grid.dim() == 1) {
      acc += w * ((1.0 - tx) * phi[ix] + tx * phi[ix + 1]);
      continue;
    }
    int iy;
    double ty;
    axis_interp(x.y, iy, ty);
    const double v00 = phi[grid.flat_index(ix, iy)];
    const double v10 = phi[grid.flat_index(ix + 1, iy)];
    const double v01 = phi[grid.flat_index(ix, iy + 1)];
    const double v11 = phi[grid.flat_index(ix + 1, iy + 1)];
    acc += w * ((1.0 - tx) * (1.0 - ty) * v00 + tx * (1.0 - ty) * v10 +
                (1.0 - tx) * ty * v01 + tx * ty * v11);
  }
  return acc;
}

double pairing_sigma(const Grid& grid, const std::vector<double>& phi1,
                     const std::vector<double>& phi2, const DiscreteMeasure& mu1,
                     const DiscreteMeasure& mu2) {
  return grid_pairing(grid, phi1, mu1) + grid_pairing(grid, phi2, mu2);
}

double grid_lipschitz(const Grid& grid, const std::vector<double>& values) {
  if (static_cast<int>(values.size()) != grid.cell_count()) {
    throw std::invalid_argument("dual data size mismatch");
  }
  const int n = grid.cells_per_axis();
  const double dx = grid.spacing();
  double lip = 0.0;
  if (grid.dim() == 1) {
    for (int i = 0; i + 1 < n; ++i) lip = std::max(lip, std::abs(values[i + 1] - values[i]));
    return lip / dx;
  }
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int i = iy * n + ix;
      if (ix + 1 < n) lip = std::max(lip, std::abs(values[i + 1] - values[i]));
      if (iy + 1 < n) lip = std::max(lip, std::abs(values[i + n] - values[i]));
    }
  }
  return lip / dx;
}

std::vector<double> mollify_grid_function(const Grid& grid, const std::vector<double>& values,
                                          int radius_cells) {
  if (static_cast<int>(values.size()) != grid.cell_count()) {
    throw std::invalid_argument("dual data size mismatch");
  }
  if (radius_cells <= 0) return values;
  const int n = grid.cells_per_axis();
  const int r = radius_cells;
  const double scale = static_cast<double>(r) + 1.0;
  const auto kern = [scale](double cells_away) {
    const double u = cells_away / scale;
    return std::exp(1.0 / (u * u - 1.0));
  };
  std::vector<double> out(values.size(), 0.0);
  if (grid.dim() == 1) {
    std::vector<double> kw(static_cast<std::size_t>(2 * r + 1));
    double total = 0.0;
    for (int o = -r; o <= r; ++o) total += kw[o + r] = kern(std::abs(o));
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int o = -r; o <= r; ++o) {
        acc += kw[o + r] * values[std::clamp(i + o, 0, n - 1)];
      }
      out[i] = acc / total;
    }
    return out;
  }
  std::vector<std::pair<std::pair<int, int>, double>> offsets;
  double total = 0.0;
  for (int oy = -r; oy <= r; ++oy) {
    for (int ox = -r; ox <= r; ++ox) {
      const double rho = std::sqrt(static_cast<double>(ox * ox + oy * oy));
      if (rho > static_cast<double>(r) + 1e-12) continue;
      const double kwv = kern(rho);
      offsets.push_back({{ox, oy}, kwv});
      total += kwv;
    }
  }
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      double acc = 0.0;
      for (const auto& [off, kwv] : offsets) {
        const int jx = std::clamp(ix + off.first, 0, n - 1);
        const int jy = std::clamp(iy + off.second, 0, n - 1);
        acc += kwv * values[grid.flat_index(jx, jy)];
      }
      out[grid.flat_index(ix, iy)] = acc / total;
    }
  }
  return out;
}

std::vector<double> knm_error(const DriftSpec& drift, const std::vector<ApproxParams>& ladder,
                              const Trajectory& traj1, const Trajectory& traj2, double t0,
                              double t1) {
  if (!(t1 >= t0)) throw std::invalid_argument("knm window must have t1 >= t0");
  const auto same_grid = [](const Grid& a, const Grid& b) {
    return a.dim() == b.dim() && a.half_extent() == b.half_extent() &&
           a.cells_per_axis() == b.cells_per_axis();
  };
  std::vector<double> table;
  table.reserve(ladder.size());
  for (const ApproxParams& params : ladder) {
    double total = 0.0;
    std::vector<double> err_cache;
    const Grid* cached_grid = nullptr;
    for (const Trajectory* traj : {&traj1, &traj2}) {
      const Grid& g = traj->grid;
      if (traj->times.front() > t0 + 1e-9 || traj->times.back() < t1 - 1e-9) {
        throw std::invalid_argument("time window not covered by trajectory");
      }
      if (cached_grid == nullptr || !same_grid(*cached_grid, g)) {
        const LadderField lf = build_ladder_field(drift.a_field(), params, g.half_extent());
        err_cache.resize(static_cast<std::size_t>(g.cell_count()));
        for (int i = 0; i < g.cell_count(); ++i) {
          const Vec x = g.center(i);
          err_cache[static_cast<std::size_t>(i)] = (lf(x) - drift.A(x)).norm();
        }
        cached_grid = &g;
      }
      std::vector<int> sel;
      for (int k = 0; k < static_cast<int>(traj->times.size()); ++k) {
        if (traj->times[k] >= t0 - 1e-12 && traj->times[k] <= t1 + 1e-12) sel.push_back(k);
      }
      double part = 0.0;
      for (std::size_t q = 0; q + 1 < sel.size(); ++q) {
        const int ka = sel[q];
        const int kb = sel[q + 1];
        const auto moment = [&](int k) {
          const std::vector<double>& w = traj->at(k);
          double m = 0.0;
          for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * err_cache[i];
          return std::exp(drift.lambda * traj->times[k]) * m;
        };
        part += 0.5 * (moment(ka) + moment(kb)) * (traj->times[kb] - traj->times[ka]);
      }
      total += part;
    }
    table.push_back(total);
  }
  return table;
}

}  // namespace fpot
