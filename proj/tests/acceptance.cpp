// Acceptance harness: one verdict line per criterion, exit 1 if any fails.
#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fpot/backward.hpp"
#include "fpot/config.hpp"
#include "fpot/cost.hpp"
#include "fpot/drift.hpp"
#include "fpot/fp_forward.hpp"
#include "fpot/harness.hpp"
#include "fpot/measure.hpp"
#include "fpot/ot.hpp"
#include "fpot/weak_form.hpp"

using namespace fpot;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& msg) {
    if (cond) return;
    ok = false;
    note("FAILED: " + msg);
  }
  void note(const std::string& msg) {
    if (!detail.empty()) detail += "; ";
    detail += msg;
  }
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct RunStats {
  std::string name;
  double mass_drift = 0.0;
  double steps = 0.0;
  double min_weight = 0.0;
  bool domain_small = false;
};

struct BackwardStats {
  double spacing = 0.0;
  std::vector<double> sup;
  std::vector<double> lip;
};

std::vector<RunStats> g_runs;
std::vector<BackwardStats> g_backward;

void record_run(const std::string& name, const ContractionReport& rep) {
  g_runs.push_back({name, rep.mass_drift, static_cast<double>(rep.solver_steps), rep.min_weight,
                    rep.domain_small});
}

void record_run(const std::string& name, const Trajectory& traj) {
  g_runs.push_back(
      {name, traj.mass_drift, static_cast<double>(traj.steps), traj.min_weight, traj.domain_small});
}

ExperimentConfig config_from(const std::string& text) {
  return ExperimentConfig::from_kv(KeyValueConfig::parse_text(text));
}

double ratio_at(const ContractionReport& rep, std::size_t i) {
  return std::sqrt(rep.rows[i].cost_plain / rep.cost0);
}

DiscreteMeasure random_cloud(std::mt19937_64& rng, int n, int dim) {
  std::uniform_real_distribution<double> P(-3.0, 3.0);
  std::uniform_real_distribution<double> W(0.05, 1.0);
  std::vector<Vec> pts;
  std::vector<double> w;
  pts.reserve(n);
  w.reserve(n);
  for (int i = 0; i < n; ++i) {
    pts.push_back(dim == 1 ? Vec{P(rng), 0.0} : Vec{P(rng), P(rng)});
    w.push_back(W(rng));
  }
  return DiscreteMeasure::from_weighted_points(pts, w, dim, true);
}

// 1. Transport cost between evolving profiles contracts like exp(-lambda t);
//    the first-order-in-dx ratio defect is removed by Richardson extrapolation
//    across the n=160 and n=320 grids.
void c1_contraction_rate(Check& c) {
  auto make = [](int n) {
    return config_from("drift = ou\nlambda = 1\ncheckpoints = 0.25,0.5,1.0\ngrid.n = " +
                       std::to_string(n) + "\n");
  };
  const auto fine = run_contraction(make(320));
  const auto coarse = run_contraction(make(160));
  record_run("contraction-ou-n320", fine);
  record_run("contraction-ou-n160", coarse);
  c.require(fine.all_passed, "fine-grid bound check failed");
  c.require(coarse.all_passed, "coarse-grid bound check failed");
  c.require(fine.rows.size() == 3 && coarse.rows.size() == 3, "expected three checkpoints");
  for (std::size_t i = 0; i < fine.rows.size() && i < coarse.rows.size(); ++i) {
    const double t = fine.rows[i].t;
    const double rf = ratio_at(fine, i);
    const double rc = ratio_at(coarse, i);
    const double extrap = 2.0 * rf - rc;
    const double target = std::exp(-t);
    c.note("t=" + fmt("%.2f", t) + " raw=" + fmt("%.4f", rf) + " extrap=" + fmt("%.4f", extrap) +
           " target=" + fmt("%.4f", target));
    c.require(std::abs(extrap - target) <= 0.02 * target,
              "extrapolated ratio off by more than 2% at t=" + fmt("%.2f", t));
  }
}

// 2. With zero drift the cost between two translated profiles stays flat:
//    quadratic cost within 2%, bounded concave cost monotone under the
//    padded bound chain.
void c2_flat_profiles(Check& c) {
  const auto quad = run_contraction(config_from(""));
  record_run("heat-power2", quad);
  double worst = 0.0;
  for (std::size_t i = 0; i < quad.rows.size(); ++i) {
    worst = std::max(worst, std::abs(ratio_at(quad, i) - 1.0));
  }
  c.note("max |ratio-1| = " + fmt("%.4f", worst));
  c.require(worst <= 0.02, "quadratic-cost ratio drifted from 1");
  c.require(quad.all_passed, "quadratic-cost bound check failed");

  const auto capped = run_contraction(config_from("cost = min:1\n"));
  record_run("heat-min1", capped);
  c.require(capped.all_passed, "capped-cost bound check failed");
  c.require(capped.monotone_when_flat, "capped-cost sequence not monotone within tolerance");
}

// 3. 2d rotation preserves the profile shapes, so the cost ratio stays near 1.
void c3_rotation_2d(Check& c) {
  const auto rep = run_contraction(config_from(
      "dim = 2\ndrift = rotation\nlambda = 0\ncost = power:2\n"
      "mu1 = gaussian:-0.75,0,0.04\nmu2 = gaussian:0.75,0,0.04\n"
      "grid.L = 5\ngrid.n = 96\nT = 0.5\ncheckpoints = 0.125,0.25,0.375,0.5\n"
      "n_max = 512\njobs = 4\n"));
  record_run("rotation-2d", rep);
  double worst = 0.0;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    worst = std::max(worst, std::abs(ratio_at(rep, i) - 1.0));
  }
  c.note("max |ratio-1| = " + fmt("%.4f", worst));
  c.require(worst <= 0.03, "rotation ratio drifted from 1");
  c.require(rep.all_passed, "rotation bound check failed");
}

// 4. Expansive drift (lambda = -1): every checkpoint is tested against the
//    exp(|lambda| t)-grown initial cost and must stay below it.
void c4_expansive_growth(Check& c) {
  const auto rep = run_contraction(config_from(
      "drift = ou\nlambda = -1\ncost = min:1\nT = 0.2\ncheckpoints = 0.05,0.1,0.15,0.2\n"));
  record_run("expansive-ou", rep);
  c.require(!rep.rows.empty(), "no checkpoint rows");
  for (const auto& row : rep.rows) {
    c.require(row.decay_checked, "growth bound not evaluated at t=" + fmt("%.2f", row.t));
    c.require(row.passed, "growth bound violated at t=" + fmt("%.2f", row.t));
  }
  c.require(rep.all_passed, "expansive run failed its bound chain");
}

// 5. Relaxation toward the invariant profile: the fitted decay rate of the
//    transport distance matches the drift rate within 5%.
void c5_invariant_rate(Check& c) {
  const auto rep =
      run_invariant(config_from("drift = ou\nlambda = 1\nmu1 = gaussian:0.8,1.0\nT = 1.5\n"));
  c.note("rate ratio = " + fmt("%.4f", rep.w_rate));
  c.require(!rep.degenerate_fit, "rate fit degenerate");
  c.require(rep.passed, "invariant run failed");
  c.require(std::abs(rep.w_rate - 1.0) <= 0.05, "fitted rate off by more than 5%");
}

// 6. Dual replay: rescale, extend duals, push them backward, re-check the
//    constraint, and close the chain inequality. The smoothed-drift error
//    table must shrink as the approximation index n grows.
void c6_dual_replay(Check& c) {
  const auto heat = replay_dual_proof(config_from("T = 0.25\n"));
  c.note("heat chain_slack = " + fmt("%.3e", heat.chain_slack));
  c.require(heat.passed, "heat replay failed at stage: " +
                             (heat.failed_stage.empty() ? "unknown" : heat.failed_stage));
  c.require(heat.failed_stage.empty(), "heat replay reported a failed stage");
  c.require(heat.chain_slack >= -1e-3 * (1.0 + std::abs(heat.cost_s0)),
            "heat chain inequality violated");

  const auto sign = replay_dual_proof(config_from("drift = sign\nT = 0.25\n"));
  c.note("sign chain_slack = " + fmt("%.3e", sign.chain_slack));
  c.require(sign.passed, "sign replay failed at stage: " +
                             (sign.failed_stage.empty() ? "unknown" : sign.failed_stage));
  const std::size_t cols = sign.ladder_m.size();
  const std::size_t rows = sign.ladder_n.size();
  c.require(sign.k_table.size() == rows * cols, "error table has wrong shape");
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i + 1 < rows; ++i) {
      const double hi = sign.k_table[i * cols + j];
      const double lo = sign.k_table[(i + 1) * cols + j];
      c.require(lo < hi, "error table not decreasing in n at column " + std::to_string(j));
    }
  }
}

// 7. Dual feasibility survives backward propagation: for twelve drift/cost
//    combinations, extend LP duals to the grid by transform, march both
//    potentials backward with the same field, and re-check the pair
//    constraint within the scheme budget 5(dx + dt).
void c7_backward_pair(Check& c) {
  const std::vector<std::pair<const char*, CostFn>> costs = {
      {"power:1", CostFn::power(1.0)},
      {"power:2", CostFn::power(2.0)},
      {"min:1", CostFn::bounded_concave(1.0)},
  };
  struct Combo {
    const char* name;
    int dim;
    TimeField field;
  };
  std::vector<Combo> combos;
  combos.push_back({"zero", 1, TimeField::constant(DriftSpec::zero(1).b_field())});
  {
    const auto ladder =
        build_ladder_field(DriftSpec::sign().a_field(), ApproxParams::make(16, 8), 8.5);
    combos.push_back({"sign-smoothed", 1,
                      TimeField::constant(VectorField{
                          1, [ladder](const Vec& x) { return ladder(x); }})});
  }
  combos.push_back({"linear-spd", 2,
                    TimeField::constant(DriftSpec::linear({2.0, 0.5, 0.5, 1.0}, {}, 2, 0.5)
                                            .b_field())});
  combos.push_back({"rotation", 2, TimeField::constant(DriftSpec::rotation(1.0).b_field())});

  double worst_margin = -1e30;
  for (const auto& combo : combos) {
    const Grid grid = combo.dim == 1 ? Grid(1, 8.0, 160) : Grid(2, 6.0, 48);
    DiscreteMeasure mu1, mu2;
    if (combo.dim == 1) {
      mu1 = DiscreteMeasure::from_density(gaussian_density_1d(-0.5, 0.09), grid);
      mu2 = DiscreteMeasure::from_density(gaussian_density_1d(0.5, 0.09), grid);
    } else {
      mu1 = DiscreteMeasure::from_density(gaussian_density_2d({-0.5, 0.0}, 0.16), grid);
      mu2 = DiscreteMeasure::from_density(gaussian_density_2d({0.5, 0.0}, 0.16), grid);
    }
    const auto c1 = coarsen_support(mu1, 400);
    const auto c2 = coarsen_support(mu2, 400);
    for (const auto& [cname, h] : costs) {
      const auto tr = transport_cost(c1.measure, c2.measure, h, 1024);
      const auto centers = grid.centers();
      const auto psi2 = h_transform(h, c1.measure.points(), tr.phi1, centers);
      const auto psi1 = h_transform(h, centers, psi2, centers);
      const double viol_s1 = check_constraint_pair(grid, psi1, psi2, h);
      SolverConfig sc;
      sc.grid = grid;
      const auto sol1 = solve_backward(psi1, combo.field, 0.0, 0.1, sc);
      const auto sol2 = solve_backward(psi2, combo.field, 0.0, 0.1, sc);
      const double viol_s0 = check_constraint_pair(grid, sol1.at_s0(), sol2.at_s0(), h);
      const double budget = viol_s1 + 5.0 * (grid.spacing() + sol1.dt);
      worst_margin = std::max(worst_margin, viol_s0 - budget);
      c.require(viol_s0 <= budget, std::string("constraint violated for ") + combo.name + " / " +
                                       cname);
      g_backward.push_back({grid.spacing(), sol1.sup_norm, sol1.lip_seminorm});
      g_backward.push_back({grid.spacing(), sol2.sup_norm, sol2.lip_seminorm});
    }
  }
  c.note("worst margin = " + fmt("%.3e", worst_margin));
}

// 8. Every backward solve obeys the max principle frame by frame and the
//    near-conservation of the Lipschitz seminorm.
void c8_backward_norms(Check& c) {
  c.require(!g_backward.empty(), "no backward solves recorded");
  double worst_sup = -1e30, worst_lip = -1e30;
  for (const auto& b : g_backward) {
    for (double s : b.sup) worst_sup = std::max(worst_sup, s - b.sup.back());
    worst_lip =
        std::max(worst_lip, b.lip.front() - (1.0 + 5.0 * b.spacing) * b.lip.back());
  }
  c.note("solves=" + std::to_string(g_backward.size()) + " sup excess=" + fmt("%.3e", worst_sup) +
         " lip excess=" + fmt("%.3e", worst_lip));
  c.require(worst_sup <= 1e-12, "max principle violated");
  c.require(worst_lip <= 1e-12, "gradient bound violated");
}

// 9. Exact-solver certificates on random instances, the 1d convex fast path
//    against the general solver, and transform idempotence up to roundoff.
void c9_exactness(Check& c) {
  std::mt19937_64 rng(20260817ull);
  const std::vector<CostFn> cycle = {CostFn::power(1.0),           CostFn::power(1.5),
                                     CostFn::power(2.0),           CostFn::power(3.0),
                                     CostFn::bounded_concave(0.7), CostFn::bounded_concave(2.0)};
  double worst_gap = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int dim = 1 + (i % 2);
    const int n1 = 2 + static_cast<int>(rng() % 127);
    const int n2 = 2 + static_cast<int>(rng() % 127);
    const auto mu1 = random_cloud(rng, n1, dim);
    const auto mu2 = random_cloud(rng, n2, dim);
    const auto tr = transport_cost(mu1, mu2, cycle[i % cycle.size()], 1024);
    const double rel = std::abs(tr.gap) / (1.0 + tr.cost);
    worst_gap = std::max(worst_gap, rel);
    c.require(rel <= 1e-9, "duality gap too large on instance " + std::to_string(i));
  }
  c.note("worst |gap|/(1+cost) = " + fmt("%.3e", worst_gap));

  const std::vector<CostFn> convex = {CostFn::power(2.0), CostFn::power(1.3), CostFn::power(3.0)};
  for (int i = 0; i < 50; ++i) {
    const int n1 = 2 + static_cast<int>(rng() % 127);
    const int n2 = 2 + static_cast<int>(rng() % 127);
    const auto mu1 = random_cloud(rng, n1, 1);
    const auto mu2 = random_cloud(rng, n2, 1);
    const auto& h = convex[i % convex.size()];
    const auto fast = transport_cost(mu1, mu2, h, 1024);
    const auto gen = transport_cost_general(mu1, mu2, h, 1024);
    c.require(fast.fast_path, "convex 1d instance missed the fast path");
    c.require(fast.pivots == 0, "fast path needed pivots");
    c.require(std::abs(fast.cost - gen.cost) <= 1e-9 * (1.0 + gen.cost),
              "fast path disagrees with general solver");
  }

  double worst_idem = 0.0, worst_bound = 0.0;
  std::uniform_real_distribution<double> Z(-2.0, 2.0);
  for (const Grid& grid : {Grid(1, 8.0, 512), Grid(2, 8.0, 22)}) {
    const auto pts = grid.centers();
    for (const auto& h : {CostFn::power(2.0), CostFn::power(1.0), CostFn::bounded_concave(1.0)}) {
      std::vector<double> zeta(pts.size());
      for (auto& z : zeta) z = Z(rng);
      const auto t1 = h_transform(h, pts, zeta, pts);
      const auto t2 = h_transform(h, pts, t1, pts);
      const auto t3 = h_transform(h, pts, t2, pts);
      double zmax = 0.0, hmax = 0.0, sup = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        zmax = std::max(zmax, std::abs(zeta[i]));
        hmax = std::max(hmax, std::abs(t1[i]));
        sup = std::max(sup, std::abs(t3[i] - t1[i]));
      }
      const double bound = 16.0 * DBL_EPSILON * (1.0 + hmax + zmax);
      worst_idem = std::max(worst_idem, sup);
      worst_bound = std::max(worst_bound, bound);
      c.require(sup <= bound, "triple transform drifted beyond roundoff");
    }
  }
  c.note("idempotence sup = " + fmt("%.3e", worst_idem) + " (roundoff cap " +
         fmt("%.3e", worst_bound) + ")");
}

// 10. Costs approximated from below by Lipschitz envelopes give monotone
//     nondecreasing optimal costs converging to the true one, and the
//     unbounded perturbation keeps the cost within eps times its integral.
void c10_stability(Check& c) {
  std::mt19937_64 rng(7);
  for (int dim : {1, 2}) {
    const auto mu1 = random_cloud(rng, 32, dim);
    const auto mu2 = random_cloud(rng, 32, dim);
    for (double p : {2.0, 3.0}) {
      const auto h = CostFn::power(p);
      std::vector<CostFn> ladder;
      for (int n = 1; n <= 256; n *= 2) ladder.push_back(lipschitz_approx(h, n));
      const auto rep = stability_check(h, ladder, mu1, mu2, 1024);
      c.require(rep.monotone, "approximate costs not monotone (dim " + std::to_string(dim) +
                                  ", p=" + fmt("%.0f", p) + ")");
      c.require(rep.deviation >= -1e-12 && rep.deviation <= 1e-6,
                "approximate costs did not reach the limit (dim " + std::to_string(dim) +
                    ", p=" + fmt("%.0f", p) + ")");
    }
  }

  const Grid grid(1, 6.0, 96);
  const auto mu1 = DiscreteMeasure::from_density(gaussian_density_1d(-0.5, 0.09), grid);
  const auto mu2 = DiscreteMeasure::from_density(gaussian_density_1d(0.5, 0.09), grid);
  const auto h = CostFn::power(1.0);
  const double base = transport_cost(mu1, mu2, h, 1024).cost;
  for (double eps : {0.1, 0.01}) {
    const auto pert = unbounded_perturbation(h, eps, {&mu1, &mu2});
    const double c_eps = transport_cost(mu1, mu2, pert.cost, 1024).cost;
    c.note("eps=" + fmt("%.2f", eps) + " excess=" + fmt("%.3e", c_eps - base));
    c.require(c_eps <= base + eps * pert.g_integral + 1e-9,
              "perturbed cost exceeded its budget at eps=" + fmt("%.2f", eps));
  }
}

// 11. The nonsmooth-drift approximation ladder: resolvent closed forms, the
//     cap bound |A_n| <= min(|A|, n) + beta, closeness to the capped
//     resolvent approximation, and first-order decay of radial smoothing.
void c11_drift_ladder(Check& c) {
  const VectorField ident{1, [](const Vec& v) { return v; }};
  const VectorField triple{1, [](const Vec& v) { return Vec{3.0 * v.x, 0.0}; }};
  const auto sgn = DriftSpec::sign().a_field();
  const VectorField diag{2, [](const Vec& v) { return Vec{v.x, 2.0 * v.y}; }};
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  c.require(near(yosida(ident, 4.0, {2.0, 0.0}).x, 1.6), "resolvent of identity field");
  c.require(near(yosida(triple, 6.0, {1.0, 0.0}).x, 2.0), "resolvent of linear field");
  c.require(near(yosida(sgn, 10.0, {0.05, 0.0}).x, 0.5), "shrinkage inside the kink");
  c.require(near(yosida(sgn, 10.0, {0.5, 0.0}).x, 1.0), "shrinkage outside the kink");
  c.require(near(yosida(sgn, 10.0, {-0.05, 0.0}).x, -0.5), "shrinkage is odd");
  const Vec yd = yosida(diag, 8.0, {1.0, 1.0});
  c.require(near(yd.x, 8.0 / 9.0) && near(yd.y, 1.6), "componentwise resolvent");

  struct Preset {
    const char* name;
    int dim;
    VectorField A;
  };
  const std::vector<Preset> presets = {
      {"sign", 1, DriftSpec::sign().a_field()},
      {"grad-power-3", 1, DriftSpec::gradient_power(3.0, 1.0, 1).a_field()},
      {"linear-spd", 2, DriftSpec::linear({2.0, 0.5, 0.5, 1.0}, {}, 2, 0.5).a_field()},
      {"rotation", 2, DriftSpec::rotation(1.0).a_field()},
  };
  const auto params = ApproxParams::make(8, 4);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-4.0, 4.0);
  double worst_cap = -1e30, worst_close = -1e30;
  for (const auto& preset : presets) {
    for (int i = 0; i < 1000; ++i) {
      const Vec x = preset.dim == 1 ? Vec{U(rng), 0.0} : Vec{U(rng), U(rng)};
      const Vec ax = preset.A(x);
      const Vec an = smooth_bounded_approx(preset.A, params, x);
      const Vec yc = yosida_capped(preset.A, params.n, x);
      worst_cap = std::max(worst_cap,
                           an.norm() - (std::min(ax.norm(), double(params.n)) + params.beta));
      worst_close = std::max(worst_close, (an - yc).norm() - params.beta);
    }
  }
  c.note("cap slack=" + fmt("%.3e", worst_cap) + " closeness slack=" + fmt("%.3e", worst_close));
  c.require(worst_cap <= 1e-9, "smoothed drift exceeded its cap");
  c.require(worst_close <= 1e-9, "smoothed drift strayed from the capped resolvent form");

  const VectorField f1{1, [](const Vec& v) { return Vec{std::tanh(3.0 * v.x), 0.0}; }};
  for (double x : {0.4, -1.1}) {
    double prev = -1.0;
    for (int m : {4, 8, 16, 32, 64}) {
      const double err = std::abs(radial_smooth(f1, m, {x, 0.0}).x - std::tanh(3.0 * x));
      if (prev >= 0.0) {
        c.require(err <= 0.75 * prev + 1e-12,
                  "radial smoothing error did not shrink at m=" + std::to_string(m));
      }
      prev = err;
    }
  }
  const VectorField f2{2, [](const Vec& v) {
                         return Vec{std::tanh(3.0 * v.x), std::cos(2.0 * v.y) - 1.0};
                       }};
  const Vec p{0.4, -0.7};
  double prev = -1.0;
  for (int m : {4, 8, 16, 32, 64}) {
    const double err = (radial_smooth(f2, m, p) - f2(p)).norm();
    if (prev >= 0.0) {
      c.require(err <= 0.75 * prev + 1e-12,
                "2d radial smoothing error did not shrink at m=" + std::to_string(m));
    }
    prev = err;
  }
}

// 12. Conservation accounting for every forward run above, plus the weak-form
//     residual halving under simultaneous dx and dt refinement.
void c12_conservation(Check& c) {
  auto run = [](int n, double dt, int stride) {
    const Grid grid(1, 8.0, n);
    SolverConfig sc;
    sc.grid = grid;
    sc.t_end = 0.5;
    sc.dt = dt;
    sc.stride = stride;
    const auto mu0 = DiscreteMeasure::from_density(gaussian_density_1d(0.3, 0.09), grid);
    return evolve(mu0, DriftSpec::zero(1), sc);
  };
  const auto coarse = run(160, 2e-4, 16);
  const auto fine = run(320, 1e-4, 64);
  record_run("weak-form-n160", coarse);
  record_run("weak-form-n320", fine);

  const auto zeta = make_space_time_bump({0.0, 0.0}, 3.0, 0.05, 0.45, 1);
  const double res_c = weak_residual(coarse, zeta, DriftSpec::zero(1));
  const double res_f = weak_residual(fine, zeta, DriftSpec::zero(1));
  c.note("residuals " + fmt("%.3e", res_c) + " -> " + fmt("%.3e", res_f));
  c.require(std::abs(res_f) <= 0.5 * std::abs(res_c), "weak residual did not halve");

  c.require(g_runs.size() >= 8, "expected conservation stats from the earlier runs");
  double worst = 0.0;
  for (const auto& r : g_runs) {
    worst = std::max(worst, r.mass_drift / std::max(1.0, r.steps));
    c.require(r.mass_drift <= 1e-12 * std::max(1.0, r.steps), r.name + ": mass drifted");
    c.require(r.min_weight >= 0.0, r.name + ": negative cell mass");
    c.require(!r.domain_small, r.name + ": boundary mass too large");
  }
  c.note("runs=" + std::to_string(g_runs.size()) + " worst drift/step=" + fmt("%.2e", worst));
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  struct Entry {
    int id;
    const char* name;
    double time_limit;
    void (*body)(Check&);
  };
  const std::vector<Entry> entries = {
      {1, "contraction rate matches exp(-t) after extrapolation", 30.0, c1_contraction_rate},
      {2, "pure diffusion keeps the cost flat", 30.0, c2_flat_profiles},
      {3, "2d rotation keeps the cost flat", 180.0, c3_rotation_2d},
      {4, "expansive drift stays under its growth bound", 60.0, c4_expansive_growth},
      {5, "relaxation rate toward the invariant profile", 60.0, c5_invariant_rate},
      {6, "dual replay chain closes", 120.0, c6_dual_replay},
      {7, "dual pair survives backward propagation", 600.0, c7_backward_pair},
      {8, "backward solves obey max principle and gradient bound", 10.0, c8_backward_norms},
      {9, "exact solver certificates and transform idempotence", 300.0, c9_exactness},
      {10, "Lipschitz cost ladders are stable", 120.0, c10_stability},
      {11, "nonsmooth drift approximation bounds", 120.0, c11_drift_ladder},
      {12, "conservation and weak-form consistency", 300.0, c12_conservation},
  };

  int failures = 0;
  for (const auto& e : entries) {
    Check check;
    const auto t0 = clock::now();
    try {
      e.body(check);
    } catch (const std::exception& ex) {
      check.ok = false;
      check.note(std::string("exception: ") + ex.what());
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    if (secs > e.time_limit) {
      check.ok = false;
      check.note("exceeded time budget of " + fmt("%.0f", e.time_limit) + "s");
    }
    if (!check.ok) ++failures;
    std::printf("[%2d] %s %s (%.2fs)%s%s\n", e.id, check.ok ? "PASS" : "FAIL", e.name, secs,
                check.detail.empty() ? "" : " ", check.detail.c_str());
    std::fflush(stdout);
  }
  if (failures > 0) std::printf("%d of %zu criteria failed\n", failures, entries.size());
  return failures > 0 ? 1 : 0;
}
