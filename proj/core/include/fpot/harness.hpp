#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fpot/config.hpp"
#include "fpot/cost.hpp"
#include "fpot/drift.hpp"
#include "fpot/fp_forward.hpp"
#include "fpot/geometry.hpp"
#include "fpot/measure.hpp"
#include "fpot/ot.hpp"

namespace fpot {

/// A verification stage missed its tolerance. what() = "<stage>: <detail>";
/// the CLI maps this to exit code 1.
struct StageFailure : std::runtime_error {
  std::string stage;
  StageFailure(const std::string& stage_name, const std::string& detail)
      : std::runtime_error(stage_name + ": " + detail), stage(stage_name) {}
};

/// One experiment read from a flat key-value file. Measures stay symbolic
/// ("gaussian:mean,var" or "gaussian:mx,my,var") until placed on the grid.
struct ExperimentConfig {
  int dim = 1;
  std::string drift_text = "zero";
  double lambda = 0.0;
  DriftSpec drift = DriftSpec::zero(1);
  std::string cost_text = "power:2";
  CostFn cost = CostFn::power(2.0);
  std::string mu1_text = "gaussian:-0.5,0.09";
  std::string mu2_text = "gaussian:0.5,0.09";
  Grid grid{1, 8.0, 320};
  double dt = 0.0;       // 0 = automatic CFL step
  double t_end = 1.0;
  double cfl = 0.3;
  int stride = 0;        // 0 = automatic frame thinning
  std::vector<double> checkpoints;  // default: {T/4, T/2, 3T/4, T}
  std::vector<int> ladder_n{4, 16, 64};
  std::vector<int> ladder_m{8, 32};
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int n_max = 512;  // support coarsening budget per marginal
  int jobs = 1;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_kv(const KeyValueConfig& kv);

  SolverConfig solver_config() const;
  DiscreteMeasure initial_mu1() const;
  DiscreteMeasure initial_mu2() const;
};

/// Parses "gaussian:mean,var" (1D) or "gaussian:mx,my,var" (2D) onto a grid.
DiscreteMeasure measure_from_spec(const std::string& text, const Grid& grid);

/// Parses "power:p" or "min:cap" cost specifications.
CostFn cost_from_spec(const std::string& text);

struct CheckpointRow {
  double t = 0.0;
  double cost_contracted = 0.0;  // C_{h_{lambda t}}(mu1_t, mu2_t)
  double gap_contracted = 0.0;
  double cost_plain = 0.0;  // C_h(mu1_t, mu2_t)
  double gap_plain = 0.0;
  double bound = 0.0;        // C_h at time zero, the contraction bound
  double decay_bound = 0.0;  // e^{-p lambda t} scaled bound when a p applies
  bool decay_checked = false;
  double tol = 0.0;     // accounted tolerance at this row
  double margin = 0.0;  // bound + tol - cost_contracted
  bool passed = true;
  double scheme_error = 0.0;  // coarse-grid Richardson difference
  double boundary_mass1 = 0.0;
  double boundary_mass2 = 0.0;
  double frame_equiv_error = 0.0;  // direct vs rescaled-frame cost
  double coarsen_radius = 0.0;  // summed cluster radii of both marginals here
};

struct ContractionReport {
  double cost0 = 0.0;  // C_h(mu1_0, mu2_0)
  double gap0 = 0.0;
  double radius0 = 0.0;  // summed cluster radii of both initial marginals
  std::vector<CheckpointRow> rows;
  bool all_passed = true;
  bool monotone_when_flat = true;  // lambda = 0: plain cost nonincreasing
  double solver_dt = 0.0;
  long long solver_steps = 0;
  double mass_drift = 0.0;
  double min_weight = 0.0;
  bool domain_small = false;

  void write_report_csv(std::ostream& os) const;
  void write_diagnostics(std::ostream& os) const;
};

ContractionReport run_contraction(const ExperimentConfig& cfg);

struct InvariantRow {
  double t = 0.0;
  double cost = 0.0;  // C_h(rho_t, rho_inf)
  double gap = 0.0;
  double w_value = 0.0;  // cost^{1/p} when h is a power
};

struct InvariantReport {
  std::vector<InvariantRow> rows;
  double fitted_rate = 0.0;    // decay rate of C_h
  double target_rate = 0.0;    // p * lambda
  double w_rate = 0.0;         // fitted_rate / p when h is a power
  double stationarity = 0.0;   // long-run residual (0 for closed forms)
  double drift_moment = 0.0;   // int |B - lambda x| d rho_inf
  bool closed_form = false;
  bool degenerate_fit = false;  // started at rho_inf, nothing to fit
  bool passed = true;

  void write_report_csv(std::ostream& os) const;
  void write_diagnostics(std::ostream& os) const;
};

InvariantReport run_invariant(const ExperimentConfig& cfg);

struct ReplayReport {
  double t_end = 0.0;
  double s0 = 0.0;
  double s1 = 0.0;
  double cost_s1 = 0.0;  // LP value C_h(sigma1_{s1}, sigma2_{s1})
  double gap_s1 = 0.0;
  double cost_s0 = 0.0;  // C_h(sigma1_{s0}, sigma2_{s0})
  double gap_s0 = 0.0;
  double sigma_pair_s1 = 0.0;  // pairing of mollified duals at s1
  double sigma_pair_s0 = 0.0;  // pairing of backward solutions at s0
  double ell = 0.0;            // Lipschitz bound of the mollified duals
  double lip_level = 0.0;      // Lipschitz constant of the cost used
  double delta_shift = 0.0;    // feasibility shift applied to each dual
  double viol_s1 = 0.0;
  double viol_s0 = 0.0;
  std::vector<int> ladder_n;
  std::vector<int> ladder_m;
  std::vector<double> k_table;  // row n, column m
  double k_used = 0.0;          // entry for the largest (n, m)
  double chain_conservation = 0.0;  // sigma_pair_s0 + ell K - sigma_pair_s1
  double chain_slack = 0.0;         // cost_s0 + ell K - sigma_pair_s1
  std::string failed_stage;         // empty when every stage met tolerance
  bool passed = true;

  void write_report(std::ostream& os) const;
  void write_k_table_csv(std::ostream& os) const;
};

/// Replays the comparison chain at checkpoint T = cfg.t_end. Every stage is
/// computed and reported; the first stage missing its tolerance is recorded
/// in failed_stage ("rescale", "duals", "backward", "constraint", "chain").
ReplayReport replay_dual_proof(const ExperimentConfig& cfg);

/// Closed-form oracle checks; each pair is (name, passed).
std::vector<std::pair<std::string, bool>> selftest_suite();

/// Writes report.csv, diagnostics.txt and plotdata/{cost,bound}.csv under
/// dir (created if missing).
void write_contraction_outputs(const ContractionReport& report, const std::string& dir);
void write_invariant_outputs(const InvariantReport& report, const std::string& dir);
void write_replay_outputs(const ReplayReport& report, const std::string& dir);

/// Reads a report.csv written by write_contraction_outputs and regenerates
/// plotdata/{cost,bound}.csv under dir.
void plotdata_from_report(const std::string& report_csv, const std::string& dir);

}  // namespace fpot
