#include "fpot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "fpot/backward.hpp"
#include "fpot/rescale.hpp"
#include "fpot/time_map.hpp"

namespace fpot {
namespace {

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.12g", v);
  return b;
}

std::vector<double> split_args(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

// Fails the declared lambda certificate with a seeded sampler; the only
// randomness in an experiment run.
void validate_certificate(const ExperimentConfig& cfg) {
  const MonotonicityReport report = check_lambda_monotone(
      cfg.drift.b_field(), cfg.lambda, 2000, cfg.grid.half_extent(), cfg.seed);
  if (!report.passed) {
    throw StageFailure("certificate", "drift fails declared lambda-monotonicity, worst ratio " +
                                          fmt(report.worst_ratio));
  }
}

struct CoarsenPad {
  double disp1 = 0.0;   // sum of weight * displacement for one marginal
  double disp2 = 0.0;   // sum of weight * displacement^2
  double radius = 0.0;  // max displacement
  double mass = 0.0;

  static CoarsenPad from(const CoarsenResult& c) {
    return {c.disp1, c.disp2, c.radius, c.mass};
  }
};

struct CheckpointCosts {
  TransportResult contracted;
  TransportResult plain;
  double frame_equiv_error = 0.0;
  CoarsenPad pad1, pad2;
};

CheckpointCosts checkpoint_costs(const ExperimentConfig& cfg, const Trajectory& traj1,
                                 const Trajectory& traj2, double t) {
  const DiscreteMeasure mu1t = measure_from_weights(cfg.grid, weights_at_time(traj1, t));
  const DiscreteMeasure mu2t = measure_from_weights(cfg.grid, weights_at_time(traj2, t));
  const CoarsenResult c1 = coarsen_support(mu1t, cfg.n_max);
  const CoarsenResult c2 = coarsen_support(mu2t, cfg.n_max);
  CheckpointCosts out;
  out.pad1 = CoarsenPad::from(c1);
  out.pad2 = CoarsenPad::from(c2);
  const CostFn hlt = rescale_cost(cfg.cost, cfg.lambda * t);
  out.contracted = transport_cost(c1.measure, c2.measure, hlt, cfg.n_max);
  out.plain = transport_cost(c1.measure, c2.measure, cfg.cost, cfg.n_max);
  const double factor = std::exp(cfg.lambda * t);
  const TransportResult framed =
      transport_cost(c1.measure.pushforward_scale(factor),
                     c2.measure.pushforward_scale(factor), cfg.cost, cfg.n_max);
  out.frame_equiv_error = std::abs(framed.cost - out.contracted.cost);
  return out;
}

// Weighted p-norm of one marginal's coarsening displacements, bounded by
// the second moment for p <= 2 and by radius^(p-2) disp2 above.
double coarsen_disp(const CoarsenPad& pad, double p) {
  if (pad.disp2 <= 0.0 || pad.mass <= 0.0) return 0.0;
  if (p <= 2.0) return std::pow(pad.mass, 1.0 / p - 0.5) * std::sqrt(pad.disp2);
  return std::pow(std::pow(pad.radius, p - 2.0) * pad.disp2, 1.0 / p);
}

// Loosens a transported-cost bound by the coarsening displacement at both
// ends. Power costs keep the Minkowski form (cost^{1/p} + c^{1/p} D)^p;
// general costs pay a Lipschitz increment on the first moments. end_scale
// is the spatial factor the rescaled frame applies at the later time.
double coarsen_padded_bound(const CostFn& h, double base_cost, const CoarsenPad& s1,
                            const CoarsenPad& s2, const CoarsenPad& e1, const CoarsenPad& e2,
                            double end_scale, double diam) {
  const double lin_total = s1.disp1 + s2.disp1 + end_scale * (e1.disp1 + e2.disp1);
  if (lin_total <= 0.0) return base_cost;
  const std::optional<double> p = h.growth_exponent();
  const double c1 = h(1.0);
  if (p && *p >= 1.0 && c1 > 0.0 && base_cost >= 0.0) {
    const double disp = coarsen_disp(s1, *p) + coarsen_disp(s2, *p) +
                        end_scale * (coarsen_disp(e1, *p) + coarsen_disp(e2, *p));
    const double root = std::pow(base_cost, 1.0 / *p) + std::pow(c1, 1.0 / *p) * disp;
    return std::pow(root, *p);
  }
  const double r_max = std::max({s1.radius, s2.radius, e1.radius, e2.radius});
  const double reach = std::max(end_scale, 1.0) * (diam + 2.0 * r_max);
  return base_cost + h.lipschitz_on(reach) * std::max(end_scale, 1.0) * lin_total;
}

double boundary_leak_before(const Trajectory& traj, double t) {
  double leak = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (traj.times[k] <= t + 1e-12) leak = std::max(leak, traj.boundary_mass[k]);
  }
  return leak;
}

std::vector<double> default_checkpoints(double t_end, int count) {
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) {
    out.push_back(t_end * static_cast<double>(k) / static_cast<double>(count));
  }
  return out;
}

// Least squares slope of log(values) against times; entries below the floor
// are dropped. Returns false when fewer than two points survive.
bool fit_exponential(const std::vector<double>& times, const std::vector<double>& values,
                     double floor, double& rate) {
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > floor) {
      ts.push_back(times[i]);
      ys.push_back(std::log(values[i]));
    }
  }
  if (ts.size() < 2) return false;
  const double n = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double denom = n * stt - st * st;
  if (denom <= 0.0) return false;
  rate = -(n * sty - st * sy) / denom;
  return true;
}

// Smallest radius holding all but a 1e-9 fraction of the mass; grid
// truncation leaves trace weights at the walls that must not dictate the
// Lipschitz level of the regularized cost.
double effective_radius(const DiscreteMeasure& mu) {
  std::vector<std::pair<double, double>> by_norm(mu.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    by_norm[i] = {mu.points()[i].norm(), mu.weights()[i]};
    total += mu.weights()[i];
  }
  std::sort(by_norm.begin(), by_norm.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  double tail = 0.0;
  for (const auto& [r, w] : by_norm) {
    tail += w;
    if (tail > 1e-9 * total) return r;
  }
  return 0.0;
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  writer(out);
}

void write_curve_csv(const std::string& path, const std::vector<double>& t,
                     const std::vector<double>& v) {
  write_file(path, [&](std::ostream& os) {
    os << "t,value\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
      os << fmt(t[i]) << ',' << fmt(v[i]) << '\n';
    }
  });
}

}  // namespace

DiscreteMeasure measure_from_spec(const std::string& text, const Grid& grid) {
  const auto colon = text.find(':');
  const std::string kind = colon == std::string::npos ? text : text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind != "gaussian") throw ConfigError("unsupported measure spec: " + text);
  std::vector<double> vals;
  try {
    vals = split_args(args);
  } catch (const std::exception&) {
    throw ConfigError("measure spec has malformed numbers: " + text);
  }
  if (grid.dim() == 1) {
    if (vals.size() != 2 || !(vals[1] > 0.0)) {
      throw ConfigError("1d gaussian measure spec needs mean,variance: " + text);
    }
    return DiscreteMeasure::from_density(gaussian_density_1d(vals[0], vals[1]), grid);
  }
  if (vals.size() != 3 || !(vals[2] > 0.0)) {
    throw ConfigError("2d gaussian measure spec needs mx,my,variance: " + text);
  }
  return DiscreteMeasure::from_density(gaussian_density_2d({vals[0], vals[1]}, vals[2]), grid);
}

CostFn cost_from_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = colon == std::string::npos ? text : text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  std::vector<double> vals;
  try {
    vals = split_args(args);
  } catch (const std::exception&) {
    throw ConfigError("cost spec has malformed numbers: " + text);
  }
  if (kind == "power") {
    if (vals.size() != 1 || !(vals[0] > 0.0)) {
      throw ConfigError("power cost spec needs a positive exponent: " + text);
    }
    return CostFn::power(vals[0]);
  }
  if (kind == "min") {
    if (vals.size() != 1 || !(vals[0] > 0.0)) {
      throw ConfigError("min cost spec needs a positive cap: " + text);
    }
    return CostFn::bounded_concave(vals[0]);
  }
  throw ConfigError("unknown cost: " + text);
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_kv(KeyValueConfig::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  kv.require_known({"dim", "drift", "lambda", "cost", "mu1", "mu2", "grid.L", "grid.n", "dt",
                    "T", "cfl", "stride", "checkpoints", "ladder.n", "ladder.m", "out_dir",
                    "seed", "n_max", "jobs"});
  ExperimentConfig cfg;
  cfg.dim = static_cast<int>(kv.get_int("dim", 1));
  if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("config value for dim must be 1 or 2");
  cfg.lambda = kv.get_real("lambda", 0.0);
  cfg.drift_text = kv.get_string("drift", "zero");
  try {
    cfg.drift = DriftSpec::parse(cfg.drift_text, cfg.dim, cfg.lambda);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config value for drift is invalid: ") + e.what());
  }
  cfg.cost_text = kv.get_string("cost", "power:2");
  cfg.cost = cost_from_spec(cfg.cost_text);
  cfg.mu1_text =
      kv.get_string("mu1", cfg.dim == 1 ? "gaussian:-0.5,0.09" : "gaussian:-0.5,0,0.25");
  cfg.mu2_text =
      kv.get_string("mu2", cfg.dim == 1 ? "gaussian:0.5,0.09" : "gaussian:0.5,0,0.25");
  const double half = kv.get_real("grid.L", 8.0);
  if (!(half > 0.0)) throw ConfigError("config value for grid.L must be positive");
  const long long n = kv.get_int("grid.n", 320);
  if (n < 8 || n > 4096) throw ConfigError("config value for grid.n must lie in [8, 4096]");
  cfg.grid = Grid(cfg.dim, half, static_cast<int>(n));
  cfg.dt = kv.get_real("dt", 0.0);
  if (cfg.dt < 0.0) throw ConfigError("config value for dt must be nonnegative");
  cfg.t_end = kv.get_real("T", 1.0);
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) {
    throw ConfigError("config value for T must be finite and nonnegative");
  }
  cfg.cfl = kv.get_real("cfl", 0.3);
  if (!(cfg.cfl > 0.0) || cfg.cfl > 1.0) {
    throw ConfigError("config value for cfl must lie in (0, 1]");
  }
  cfg.stride = static_cast<int>(kv.get_int("stride", 0));
  if (cfg.stride < 0) throw ConfigError("config value for stride must be nonnegative");
  cfg.checkpoints = kv.get_reals("checkpoints");
  if (cfg.checkpoints.empty()) cfg.checkpoints = default_checkpoints(cfg.t_end, 4);
  for (double t : cfg.checkpoints) {
    if (t < 0.0 || t > cfg.t_end + 1e-12) throw ConfigError("checkpoints must lie in [0, T]");
  }
  std::sort(cfg.checkpoints.begin(), cfg.checkpoints.end());
  cfg.checkpoints.erase(std::unique(cfg.checkpoints.begin(), cfg.checkpoints.end()),
                        cfg.checkpoints.end());
  if (kv.has("ladder.n")) cfg.ladder_n = kv.get_ints("ladder.n");
  if (kv.has("ladder.m")) cfg.ladder_m = kv.get_ints("ladder.m");
  for (int v : cfg.ladder_n) {
    if (v < 1) throw ConfigError("ladder.n entries must be positive");
  }
  for (int v : cfg.ladder_m) {
    if (v < 1) throw ConfigError("ladder.m entries must be positive");
  }
  if (cfg.ladder_n.empty() || cfg.ladder_m.empty()) {
    throw ConfigError("ladder.n and ladder.m must be nonempty");
  }
  cfg.out_dir = kv.get_string("out_dir", "out");
  cfg.seed = kv.get_u64("seed", 0);
  cfg.n_max = static_cast<int>(kv.get_int("n_max", 512));
  if (cfg.n_max < 16 || cfg.n_max > 1024) {
    throw ConfigError("config value for n_max must lie in [16, 1024]");
  }
  cfg.jobs = static_cast<int>(kv.get_int("jobs", 1));
  if (cfg.jobs < 1) throw ConfigError("config value for jobs must be positive");
  return cfg;
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig sc;
  sc.grid = grid;
  sc.dt = dt;
  sc.t_end = t_end;
  sc.cfl_safety = cfl;
  sc.stride = stride;
  return sc;
}

DiscreteMeasure ExperimentConfig::initial_mu1() const { return measure_from_spec(mu1_text, grid); }
DiscreteMeasure ExperimentConfig::initial_mu2() const { return measure_from_spec(mu2_text, grid); }

ContractionReport run_contraction(const ExperimentConfig& cfg) {
  validate_certificate(cfg);
  const DiscreteMeasure mu1 = cfg.initial_mu1();
  const DiscreteMeasure mu2 = cfg.initial_mu2();

  const SolverConfig solver = cfg.solver_config();
  const Trajectory traj1 = evolve(mu1, cfg.drift, solver);
  const Trajectory traj2 = evolve(mu2, cfg.drift, solver);

  ContractionReport report;
  report.solver_dt = traj1.dt;
  report.solver_steps = traj1.steps;
  report.mass_drift = std::max(traj1.mass_drift, traj2.mass_drift);
  report.min_weight = std::min(traj1.min_weight, traj2.min_weight);
  report.domain_small = traj1.domain_small || traj2.domain_small;

  CoarsenPad pad0_1, pad0_2;
  {
    const CoarsenResult c1 = coarsen_support(mu1, cfg.n_max);
    const CoarsenResult c2 = coarsen_support(mu2, cfg.n_max);
    const TransportResult res0 = transport_cost(c1.measure, c2.measure, cfg.cost, cfg.n_max);
    report.cost0 = res0.cost;
    report.gap0 = res0.gap;
    report.radius0 = c1.radius + c2.radius;
    pad0_1 = CoarsenPad::from(c1);
    pad0_2 = CoarsenPad::from(c2);
  }

  // Fine-grid costs per checkpoint, optionally in parallel.
  std::vector<CheckpointCosts> fine(cfg.checkpoints.size());
  if (cfg.jobs > 1) {
    std::vector<std::future<CheckpointCosts>> futures;
    futures.reserve(cfg.checkpoints.size());
    for (double t : cfg.checkpoints) {
      futures.push_back(std::async(std::launch::async, checkpoint_costs, std::cref(cfg),
                                   std::cref(traj1), std::cref(traj2), t));
    }
    for (std::size_t i = 0; i < futures.size(); ++i) fine[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
      fine[i] = checkpoint_costs(cfg, traj1, traj2, cfg.checkpoints[i]);
    }
  }

  // Richardson control run at half resolution for the scheme-error part of
  // the tolerance.
  std::vector<double> coarse_costs(cfg.checkpoints.size(), 0.0);
  bool have_coarse = cfg.grid.cells_per_axis() >= 16;
  if (have_coarse) {
    ExperimentConfig half = cfg;
    half.grid = Grid(cfg.dim, cfg.grid.half_extent(), cfg.grid.cells_per_axis() / 2);
    half.dt = 0.0;
    const SolverConfig solver_half = half.solver_config();
    const Trajectory h1 = evolve(half.initial_mu1(), cfg.drift, solver_half);
    const Trajectory h2 = evolve(half.initial_mu2(), cfg.drift, solver_half);
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
      const double t = cfg.checkpoints[i];
      const CoarsenResult c1 =
          coarsen_support(measure_from_weights(half.grid, weights_at_time(h1, t)), cfg.n_max);
      const CoarsenResult c2 =
          coarsen_support(measure_from_weights(half.grid, weights_at_time(h2, t)), cfg.n_max);
      const CostFn hlt = rescale_cost(cfg.cost, cfg.lambda * t);
      coarse_costs[i] = transport_cost(c1.measure, c2.measure, hlt, cfg.n_max).cost;
    }
  }

  std::optional<double> decay_p;
  if (cfg.lambda > 0.0) {
    decay_p = cfg.cost.growth_exponent();
  } else if (cfg.lambda < 0.0) {
    decay_p = cfg.cost.shrink_exponent();
  }
  if (decay_p && !(*decay_p > 0.0)) decay_p.reset();

  const double diam = 2.0 * std::sqrt(static_cast<double>(cfg.dim)) * cfg.grid.half_extent();
  for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
    CheckpointRow row;
    row.t = cfg.checkpoints[i];
    row.cost_contracted = fine[i].contracted.cost;
    row.gap_contracted = fine[i].contracted.gap;
    row.cost_plain = fine[i].plain.cost;
    row.gap_plain = fine[i].plain.gap;
    row.coarsen_radius = fine[i].pad1.radius + fine[i].pad2.radius;
    row.bound = coarsen_padded_bound(cfg.cost, report.cost0, pad0_1, pad0_2, fine[i].pad1,
                                     fine[i].pad2, std::exp(cfg.lambda * row.t), diam);
    row.frame_equiv_error = fine[i].frame_equiv_error;
    row.scheme_error =
        have_coarse ? std::abs(fine[i].contracted.cost - coarse_costs[i]) : 0.0;
    row.boundary_mass1 = boundary_leak_before(traj1, row.t);
    row.boundary_mass2 = boundary_leak_before(traj2, row.t);
    const double href = rescale_cost(cfg.cost, cfg.lambda * row.t)(diam);
    const double leak_cost = (row.boundary_mass1 + row.boundary_mass2) * href;
    row.tol = 3.0 * (row.scheme_error + std::abs(report.gap0) +
                     std::abs(row.gap_contracted) + leak_cost);
    row.margin = row.bound + row.tol - row.cost_contracted;
    row.passed = row.margin >= 0.0;
    if (decay_p) {
      row.decay_checked = true;
      const CoarsenPad none;
      const double start =
          coarsen_padded_bound(cfg.cost, report.cost0, pad0_1, pad0_2, none, none, 1.0, diam);
      const double decayed = std::exp(-(*decay_p) * cfg.lambda * row.t) * start;
      row.decay_bound = coarsen_padded_bound(cfg.cost, decayed, none, none, fine[i].pad1,
                                             fine[i].pad2, 1.0, diam);
      if (row.cost_plain > row.decay_bound + row.tol) row.passed = false;
    }
    report.rows.push_back(row);
  }

  if (cfg.lambda == 0.0) {
    double prev = report.cost0;
    CoarsenPad prev1 = pad0_1, prev2 = pad0_2;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const CheckpointRow& row = report.rows[i];
      const double prev_bound = coarsen_padded_bound(cfg.cost, prev, prev1, prev2, fine[i].pad1,
                                                     fine[i].pad2, 1.0, diam);
      if (row.cost_plain > prev_bound + row.tol) report.monotone_when_flat = false;
      prev = row.cost_plain;
      prev1 = fine[i].pad1;
      prev2 = fine[i].pad2;
    }
  }

  report.all_passed = report.monotone_when_flat;
  for (const CheckpointRow& row : report.rows) {
    if (!row.passed) report.all_passed = false;
  }
  return report;
}

InvariantReport run_invariant(const ExperimentConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw ConfigError("config value for lambda must be positive for invariant runs");
  validate_certificate(cfg);
  const Grid& grid = cfg.grid;

  InvariantReport report;
  DiscreteMeasure rho_inf = cfg.initial_mu1();
  if (cfg.drift_text == "ou") {
    report.closed_form = true;
    rho_inf = DiscreteMeasure::from_density(gaussian_density_1d(0.0, 1.0 / cfg.lambda), grid);
    if (cfg.dim == 2) {
      rho_inf =
          DiscreteMeasure::from_density(gaussian_density_2d({0.0, 0.0}, 1.0 / cfg.lambda), grid);
    }
  } else {
    // Long-run stationarity: march windows of one relaxation time until the
    // L1 change per unit time falls under tolerance.
    SolverConfig window_cfg = cfg.solver_config();
    window_cfg.t_end = 1.0 / cfg.lambda;
    window_cfg.stride = 0;
    std::vector<double> w = weights_from_measure(grid, cfg.initial_mu1());
    double residual = std::numeric_limits<double>::infinity();
    for (int window = 0; window < 60 && residual > 1e-8; ++window) {
      const Trajectory traj = evolve_weights(w, cfg.drift, window_cfg);
      const std::vector<double>& w_new = traj.at(traj.times.size() - 1);
      double change = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) change += std::abs(w_new[i] - w[i]);
      residual = change / window_cfg.t_end;
      w = w_new;
    }
    if (residual > 1e-8) {
      throw StageFailure("stationarity", "invariant measure not converged, residual " +
                                             fmt(residual));
    }
    report.stationarity = residual;
    rho_inf = measure_from_weights(grid, w);
  }

  const CoarsenResult cinf = coarsen_support(rho_inf, cfg.n_max);
  {
    double moment = 0.0;
    for (std::size_t i = 0; i < rho_inf.size(); ++i) {
      moment += rho_inf.weights()[i] * cfg.drift.A(rho_inf.points()[i]).norm();
    }
    report.drift_moment = moment;
  }

  const Trajectory traj = evolve(cfg.initial_mu1(), cfg.drift, cfg.solver_config());
  const std::vector<double> checkpoints =
      cfg.checkpoints.empty() ? default_checkpoints(cfg.t_end, 8) : cfg.checkpoints;

  const std::optional<double> p = cfg.cost.growth_exponent();
  std::vector<double> times, costs;
  for (double t : checkpoints) {
    const DiscreteMeasure mu_t = measure_from_weights(grid, weights_at_time(traj, t));
    const CoarsenResult ct = coarsen_support(mu_t, cfg.n_max);
    const TransportResult res = transport_cost(ct.measure, cinf.measure, cfg.cost, cfg.n_max);
    InvariantRow row;
    row.t = t;
    row.cost = res.cost;
    row.gap = res.gap;
    row.w_value = (p && *p > 0.0) ? std::pow(std::max(res.cost, 0.0), 1.0 / *p) : res.cost;
    report.rows.push_back(row);
    times.push_back(t);
    costs.push_back(res.cost);
  }

  const double p_eff = (p && *p > 0.0) ? *p : 1.0;
  report.target_rate = p_eff * cfg.lambda;
  const double floor = cfg.cost(grid.spacing());
  double rate = 0.0;
  if (fit_exponential(times, costs, floor, rate)) {
    report.fitted_rate = rate;
    report.w_rate = rate / p_eff;
    report.passed = rate >= report.target_rate * 0.95;
  } else {
    // Start already at the invariant measure: costs sit at grid scale and
    // there is nothing to fit.
    report.degenerate_fit = true;
    report.passed = true;
    for (double c : costs) {
      if (c > std::max(floor, 1e-10)) report.passed = false;
    }
  }
  return report;
}

ReplayReport replay_dual_proof(const ExperimentConfig& cfg) {
  validate_certificate(cfg);
  const double T = cfg.t_end;
  const double lambda = cfg.lambda;

  ReplayReport rep;
  rep.t_end = T;
  rep.s0 = 0.0;
  rep.s1 = s_of_t(T, lambda);
  rep.ladder_n = cfg.ladder_n;
  rep.ladder_m = cfg.ladder_m;
  const auto fail = [&rep](const std::string& stage) {
    if (rep.failed_stage.empty()) rep.failed_stage = stage;
    rep.passed = false;
  };

  const DiscreteMeasure mu1 = cfg.initial_mu1();
  const DiscreteMeasure mu2 = cfg.initial_mu2();
  const SolverConfig solver = cfg.solver_config();
  const Trajectory traj1 = evolve(mu1, cfg.drift, solver);
  const Trajectory traj2 = evolve(mu2, cfg.drift, solver);

  // Stage (i): rescale to the monotone frame. The framewise transfer
  // identity is exact and cheap to verify on the final frame.
  const DiscreteMeasure sig1_s1 = sigma_at_s(traj1, lambda, rep.s1);
  const DiscreteMeasure sig2_s1 = sigma_at_s(traj2, lambda, rep.s1);
  for (const Trajectory* traj : {&traj1, &traj2}) {
    const TransferCheck tc = integrability_transfer(*traj, cfg.drift, traj->times.size() - 1);
    if (std::abs(tc.sigma_side - tc.rho_side) > 1e-9 * (1.0 + std::abs(tc.rho_side))) {
      fail("rescale");
    }
  }

  const double grow = std::exp(std::max(lambda, 0.0) * T);
  const Grid grid_s(cfg.dim, cfg.grid.half_extent() * grow, cfg.grid.cells_per_axis());

  // Stage (ii): Kantorovich duals at s1, h-transform tightening onto the
  // grid, mollification with the feasibility shift. The chain needs a
  // Lipschitz cost; unbounded-slope costs are replaced by their largest
  // Lipschitz minorant at the slope the marginals can actually pay, which
  // leaves the coupling cost unchanged on the carried mass.
  const CoarsenResult c1 = coarsen_support(sig1_s1, cfg.n_max);
  const CoarsenResult c2 = coarsen_support(sig2_s1, cfg.n_max);
  CostFn h_used = cfg.cost;
  if (cfg.cost.lipschitz_constant().has_value()) {
    rep.lip_level = *cfg.cost.lipschitz_constant();
  } else {
    const double reach = effective_radius(sig1_s1) + effective_radius(sig2_s1);
    rep.lip_level = cfg.cost.lipschitz_on(reach);
    h_used = lipschitz_approx(cfg.cost, rep.lip_level);
  }
  const TransportResult res1 = transport_cost(c1.measure, c2.measure, h_used, cfg.n_max);
  rep.cost_s1 = res1.cost;
  rep.gap_s1 = res1.gap;
  if (std::abs(res1.gap) > 1e-9 * (1.0 + std::abs(res1.cost))) fail("duals");

  const std::vector<Vec> centers = grid_s.centers();
  const std::vector<double> psi2 = h_transform(h_used, c1.measure.points(), res1.phi1, centers);
  const std::vector<double> psi1 = h_transform(h_used, centers, psi2, centers);
  std::vector<double> m1 = mollify_grid_function(grid_s, psi1, 2);
  std::vector<double> m2 = mollify_grid_function(grid_s, psi2, 2);
  // Mollification can lift the pair above the cost; the measured worst
  // violation, split between the two potentials, is the tightest shift
  // restoring feasibility.
  const double raw_viol = check_constraint_pair(grid_s, m1, m2, h_used);
  rep.delta_shift = std::max(raw_viol, 0.0) / 2.0 + 1e-12;
  for (double& v : m1) v -= rep.delta_shift;
  for (double& v : m2) v -= rep.delta_shift;
  const double diam = 2.0 * std::sqrt(static_cast<double>(cfg.dim)) * grid_s.half_extent();
  rep.viol_s1 = check_constraint_pair(grid_s, m1, m2, h_used);
  rep.sigma_pair_s1 = pairing_sigma(grid_s, m1, m2, sig1_s1, sig2_s1);
  rep.ell = grid_lipschitz(grid_s, m1) + grid_lipschitz(grid_s, m2);
  if (rep.viol_s1 > 1e-9 * (1.0 + h_used(diam))) fail("duals");

  // Stage (iii): backward evolution under the regularized rescaled drift.
  const ApproxParams params =
      ApproxParams::make(cfg.ladder_n.back(), cfg.ladder_m.back());
  const double table_radius =
      grid_s.half_extent() * std::exp(std::max(0.0, -lambda) * T) + 1e-9;
  const auto ladder = std::make_shared<LadderField>(
      build_ladder_field(cfg.drift.a_field(), params, table_radius));
  TimeField a_tilde;
  a_tilde.dim = cfg.dim;
  a_tilde.time_dependent = lambda != 0.0;
  a_tilde.eval = [ladder, lambda](const Vec& y, double s) {
    if (lambda == 0.0) return (*ladder)(y);
    const double factor = std::exp(-lambda * t_of_s(s, lambda));
    return (*ladder)(y * factor) * factor;
  };
  SolverConfig solver_s;
  solver_s.grid = grid_s;
  solver_s.cfl_safety = cfg.cfl;
  solver_s.stride = 0;
  const DualSolution sol1 = solve_backward(m1, a_tilde, rep.s0, rep.s1, solver_s);
  const DualSolution sol2 = solve_backward(m2, a_tilde, rep.s0, rep.s1, solver_s);
  for (const DualSolution* sol : {&sol1, &sol2}) {
    const double sup_gain = sol->sup_norm.front() - sol->sup_norm.back();
    const double lip_cap = sol->lip_seminorm.back() * (1.0 + 5.0 * grid_s.spacing());
    if (sup_gain > 1e-12 || sol->lip_seminorm.front() > lip_cap) fail("backward");
  }

  // Stage (iv): constraint preservation at s0.
  rep.viol_s0 = check_constraint_pair(grid_s, sol1.at_s0(), sol2.at_s0(), h_used);
  const double pair_tol = rep.viol_s1 + 5.0 * (grid_s.spacing() + sol1.dt);
  if (rep.viol_s0 > pair_tol) fail("constraint");

  // Stage (v): the comparison chain.
  rep.sigma_pair_s0 = pairing_sigma(grid_s, sol1.at_s0(), sol2.at_s0(), mu1, mu2);
  {
    const CoarsenResult i1 = coarsen_support(mu1, cfg.n_max);
    const CoarsenResult i2 = coarsen_support(mu2, cfg.n_max);
    const TransportResult res0 = transport_cost(i1.measure, i2.measure, h_used, cfg.n_max);
    rep.cost_s0 = res0.cost;
    rep.gap_s0 = res0.gap;
  }
  std::vector<ApproxParams> ladder_params;
  for (int nv : cfg.ladder_n) {
    for (int mv : cfg.ladder_m) ladder_params.push_back(ApproxParams::make(nv, mv));
  }
  rep.k_table = knm_error(cfg.drift, ladder_params, traj1, traj2, 0.0, T);
  rep.k_used = rep.k_table.back();
  rep.chain_conservation = rep.sigma_pair_s0 + rep.ell * rep.k_used - rep.sigma_pair_s1;
  rep.chain_slack = rep.cost_s0 + rep.ell * rep.k_used - rep.sigma_pair_s1;
  const double chain_tol = 1e-3 * (1.0 + std::abs(rep.cost_s0));
  if (rep.chain_slack < -chain_tol) fail("chain");
  return rep;
}

std::vector<std::pair<std::string, bool>> selftest_suite() {
  std::vector<std::pair<std::string, bool>> results;
  const auto record = [&results](const std::string& name, bool ok) {
    results.push_back({name, ok});
  };

  {
    const Grid grid(1, 8.0, 320);
    SolverConfig sc;
    sc.grid = grid;
    sc.t_end = 0.25;
    sc.stride = 0;
    const DriftSpec ou = DriftSpec::ou(1.0);
    const DiscreteMeasure rho0 =
        DiscreteMeasure::from_density(gaussian_density_1d(0.5, 0.09), grid);
    const Trajectory traj = evolve(rho0, ou, sc);
    const DiscreteMeasure rho_t = measure_from_weights(grid, traj.at(traj.times.size() - 1));
    const double want = 0.5 * std::exp(-0.25);
    record("ou mean decay", std::abs(rho_t.mean().x - want) <= 0.01 * want);
    record("mass conservation",
           traj.mass_drift <= 1e-12 * static_cast<double>(std::max<long long>(traj.steps, 1)));
  }
  {
    const Grid grid(1, 8.0, 160);
    SolverConfig sc;
    sc.grid = grid;
    sc.t_end = 0.25;
    sc.stride = 0;
    const DiscreteMeasure rho0 =
        DiscreteMeasure::from_density(gaussian_density_1d(0.0, 0.25), grid);
    const Trajectory traj = evolve(rho0, DriftSpec::zero(1), sc);
    const DiscreteMeasure rho_t = measure_from_weights(grid, traj.at(traj.times.size() - 1));
    const double want = 0.25 + 2.0 * 0.25;
    record("heat variance growth", std::abs(rho_t.axis_variance().x - want) <= 0.01 * want);
  }
  {
    const VectorField ident{1, [](const Vec& x) { return x; }};
    const Vec y = yosida(ident, 4.0, {2.0, 0.0});
    record("yosida identity field", std::abs(y.x - 1.6) <= 1e-9);
  }
  {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(-1.0, 1.0), wgt(0.1, 1.0);
    std::vector<Vec> p1, p2;
    std::vector<double> w1, w2;
    for (int i = 0; i < 32; ++i) {
      p1.push_back({pos(rng), 0.0});
      p2.push_back({pos(rng), 0.0});
      w1.push_back(wgt(rng));
      w2.push_back(wgt(rng));
    }
    const DiscreteMeasure mu1 = DiscreteMeasure::from_weighted_points(p1, w1, 1);
    const DiscreteMeasure mu2 = DiscreteMeasure::from_weighted_points(p2, w2, 1);
    const CostFn h = CostFn::power(2.0);
    const double fast = transport_cost(mu1, mu2, h).cost;
    const double general = transport_cost_general(mu1, mu2, h).cost;
    record("quantile vs simplex", std::abs(fast - general) <= 1e-9 * (1.0 + fast));
  }
  {
    const Grid grid(1, 6.0, 240);
    const DiscreteMeasure a = DiscreteMeasure::from_density(gaussian_density_1d(0.0, 0.09), grid);
    const DiscreteMeasure b = DiscreteMeasure::from_density(gaussian_density_1d(1.0, 0.09), grid);
    const double w2 = wasserstein_p(a, b, 2.0);
    record("gaussian shift w2", std::abs(w2 - 1.0) <= 0.01);
  }
  {
    const Grid grid(1, 4.0, 64);
    std::vector<double> phi(64);
    for (int i = 0; i < 64; ++i) {
      const double x = grid.axis_center(i);
      phi[i] = std::exp(-x * x);
    }
    SolverConfig sc;
    sc.grid = grid;
    sc.stride = 0;
    const DualSolution sol =
        solve_backward(phi, TimeField::constant({1, [](const Vec&) { return Vec{0.0, 0.0}; }}),
                       0.0, 0.1, sc);
    record("backward max principle", sol.sup_norm.front() <= sol.sup_norm.back());
  }
  {
    bool ok = true;
    for (double lam : {1.0, -1.0, 0.3}) {
      const double t = 0.7;
      ok = ok && std::abs(t_of_s(s_of_t(t, lam), lam) - t) <= 1e-12;
    }
    record("time map roundtrip", ok);
  }
  return results;
}

void ContractionReport::write_report_csv(std::ostream& os) const {
  os << "t,cost_hlt,gap_hlt,cost_h,gap_h,bound,decay_bound,tol,margin,passed,"
        "scheme_error,boundary_mass1,boundary_mass2,frame_equiv_error,coarsen_radius\n";
  for (const CheckpointRow& r : rows) {
    os << fmt(r.t) << ',' << fmt(r.cost_contracted) << ',' << fmt(r.gap_contracted) << ','
       << fmt(r.cost_plain) << ',' << fmt(r.gap_plain) << ',' << fmt(r.bound) << ','
       << fmt(r.decay_checked ? r.decay_bound : 0.0) << ',' << fmt(r.tol) << ','
       << fmt(r.margin) << ',' << (r.passed ? 1 : 0) << ',' << fmt(r.scheme_error) << ','
       << fmt(r.boundary_mass1) << ',' << fmt(r.boundary_mass2) << ','
       << fmt(r.frame_equiv_error) << ',' << fmt(r.coarsen_radius) << '\n';
  }
}

void ContractionReport::write_diagnostics(std::ostream& os) const {
  os << "cost0=" << fmt(cost0) << '\n';
  os << "gap0=" << fmt(gap0) << '\n';
  os << "radius0=" << fmt(radius0) << '\n';
  os << "solver_dt=" << fmt(solver_dt) << '\n';
  os << "solver_steps=" << solver_steps << '\n';
  os << "mass_drift=" << fmt(mass_drift) << '\n';
  os << "min_weight=" << fmt(min_weight) << '\n';
  os << "domain_small=" << (domain_small ? 1 : 0) << '\n';
  os << "monotone_when_flat=" << (monotone_when_flat ? 1 : 0) << '\n';
  os << "all_passed=" << (all_passed ? 1 : 0) << '\n';
}

void InvariantReport::write_report_csv(std::ostream& os) const {
  os << "t,cost,gap,w_value\n";
  for (const InvariantRow& r : rows) {
    os << fmt(r.t) << ',' << fmt(r.cost) << ',' << fmt(r.gap) << ',' << fmt(r.w_value) << '\n';
  }
}

void InvariantReport::write_diagnostics(std::ostream& os) const {
  os << "fitted_rate=" << fmt(fitted_rate) << '\n';
  os << "target_rate=" << fmt(target_rate) << '\n';
  os << "w_rate=" << fmt(w_rate) << '\n';
  os << "stationarity=" << fmt(stationarity) << '\n';
  os << "drift_moment=" << fmt(drift_moment) << '\n';
  os << "closed_form=" << (closed_form ? 1 : 0) << '\n';
  os << "degenerate_fit=" << (degenerate_fit ? 1 : 0) << '\n';
  os << "passed=" << (passed ? 1 : 0) << '\n';
}

void ReplayReport::write_report(std::ostream& os) const {
  os << "t_end=" << fmt(t_end) << '\n';
  os << "s0=" << fmt(s0) << '\n';
  os << "s1=" << fmt(s1) << '\n';
  os << "cost_s1=" << fmt(cost_s1) << '\n';
  os << "gap_s1=" << fmt(gap_s1) << '\n';
  os << "cost_s0=" << fmt(cost_s0) << '\n';
  os << "gap_s0=" << fmt(gap_s0) << '\n';
  os << "sigma_pair_s1=" << fmt(sigma_pair_s1) << '\n';
  os << "sigma_pair_s0=" << fmt(sigma_pair_s0) << '\n';
  os << "ell=" << fmt(ell) << '\n';
  os << "lip_level=" << fmt(lip_level) << '\n';
  os << "delta_shift=" << fmt(delta_shift) << '\n';
  os << "viol_s1=" << fmt(viol_s1) << '\n';
  os << "viol_s0=" << fmt(viol_s0) << '\n';
  os << "k_used=" << fmt(k_used) << '\n';
  os << "chain_conservation=" << fmt(chain_conservation) << '\n';
  os << "chain_slack=" << fmt(chain_slack) << '\n';
  os << "failed_stage=" << (failed_stage.empty() ? "none" : failed_stage) << '\n';
  os << "passed=" << (passed ? 1 : 0) << '\n';
}

void ReplayReport::write_k_table_csv(std::ostream& os) const {
  os << "n,m,K\n";
  std::size_t idx = 0;
  for (int nv : ladder_n) {
    for (int mv : ladder_m) {
      os << nv << ',' << mv << ',' << fmt(idx < k_table.size() ? k_table[idx] : 0.0) << '\n';
      ++idx;
    }
  }
}

void write_contraction_outputs(const ContractionReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir + "/plotdata");
  write_file(dir + "/report.csv", [&](std::ostream& os) { report.write_report_csv(os); });
  write_file(dir + "/diagnostics.txt", [&](std::ostream& os) { report.write_diagnostics(os); });
  std::vector<double> t, cost, bound;
  for (const CheckpointRow& r : report.rows) {
    t.push_back(r.t);
    cost.push_back(r.cost_contracted);
    bound.push_back(r.bound);
  }
  write_curve_csv(dir + "/plotdata/cost.csv", t, cost);
  write_curve_csv(dir + "/plotdata/bound.csv", t, bound);
}

void write_invariant_outputs(const InvariantReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir + "/plotdata");
  write_file(dir + "/report.csv", [&](std::ostream& os) { report.write_report_csv(os); });
  write_file(dir + "/diagnostics.txt", [&](std::ostream& os) { report.write_diagnostics(os); });
  std::vector<double> t, cost, bound;
  for (const InvariantRow& r : report.rows) {
    t.push_back(r.t);
    cost.push_back(r.cost);
  }
  if (!report.rows.empty()) {
    const double c0 = report.rows.front().cost;
    const double t0 = report.rows.front().t;
    for (const InvariantRow& r : report.rows) {
      bound.push_back(c0 * std::exp(-report.target_rate * (r.t - t0)));
    }
  }
  write_curve_csv(dir + "/plotdata/cost.csv", t, cost);
  write_curve_csv(dir + "/plotdata/bound.csv", t, bound);
}

void write_replay_outputs(const ReplayReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir + "/replay_report.txt", [&](std::ostream& os) { report.write_report(os); });
  write_file(dir + "/k_table.csv", [&](std::ostream& os) { report.write_k_table_csv(os); });
}

void plotdata_from_report(const std::string& report_csv, const std::string& dir) {
  std::ifstream in(report_csv);
  if (!in) throw ConfigError("cannot open report file: " + report_csv);
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("report file is empty: " + report_csv);
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  const auto col_index = [&cols](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int t_col = col_index("t");
  int cost_col = col_index("cost_hlt");
  if (cost_col < 0) cost_col = col_index("cost");
  const int bound_col = col_index("bound");
  if (t_col < 0 || cost_col < 0) {
    throw ConfigError("report file lacks t and cost columns: " + report_csv);
  }
  std::vector<double> t, cost, bound;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (static_cast<int>(cells.size()) <= std::max(t_col, cost_col)) {
      throw ConfigError("report row is too short: " + line);
    }
    t.push_back(std::stod(cells[t_col]));
    cost.push_back(std::stod(cells[cost_col]));
    if (bound_col >= 0 && bound_col < static_cast<int>(cells.size())) {
      bound.push_back(std::stod(cells[bound_col]));
    }
  }
  std::filesystem::create_directories(dir + "/plotdata");
  write_curve_csv(dir + "/plotdata/cost.csv", t, cost);
  if (bound.size() == t.size()) write_curve_csv(dir + "/plotdata/bound.csv", t, bound);
}

}  // namespace fpot
