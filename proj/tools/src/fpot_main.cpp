/// Command line front end.
///
/// Subcommands:
///   run <config>        contraction experiment, writes report.csv + plotdata
///   invariant <config>  decay toward the invariant measure (lambda > 0)
///   replay <config>     dual-certificate replay of the final checkpoint
///   selftest            closed-form oracle checks, one line per check
///   plotdata <report>   regenerate plotdata/*.csv from an existing report
///
/// Exit codes: 0 all checks passed, 1 a verification stage failed (the stage
/// is named on stderr), 2 the config was rejected (the key is named).

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "fpot/config.hpp"
#include "fpot/harness.hpp"

namespace {

struct Overrides {
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool out_set = false;
  bool seed_set = false;
  bool jobs_set = false;
};

void add_override_flags(CLI::App* cmd, Overrides* ov) {
  cmd->add_option("--out", ov->out_dir, "output directory (overrides config out_dir)");
  cmd->add_option("--seed", ov->seed, "sampler seed (overrides config seed)");
  cmd->add_option("--jobs", ov->jobs, "worker threads (overrides config jobs)")
      ->check(CLI::PositiveNumber);
}

fpot::ExperimentConfig load_config(const std::string& path, const CLI::App* cmd,
                                   const Overrides& ov) {
  fpot::ExperimentConfig cfg = fpot::ExperimentConfig::from_file(path);
  if (cmd->count("--out") > 0) cfg.out_dir = ov.out_dir;
  if (cmd->count("--seed") > 0) cfg.seed = ov.seed;
  if (cmd->count("--jobs") > 0) cfg.jobs = ov.jobs;
  return cfg;
}

int cmd_run(const fpot::ExperimentConfig& cfg) {
  const fpot::ContractionReport report = fpot::run_contraction(cfg);
  fpot::write_contraction_outputs(report, cfg.out_dir);
  std::printf("cost0 = %.12g  (gap %.3g)\n", report.cost0, report.gap0);
  for (const fpot::CheckpointRow& row : report.rows) {
    std::printf("t=%-8.5g  cost_hlt=%.12g  bound=%.12g  margin=%+.3e  %s\n", row.t,
                row.cost_contracted, row.bound, row.margin, row.passed ? "ok" : "VIOLATED");
  }
  std::printf("report: %s/report.csv\n", cfg.out_dir.c_str());
  if (!report.all_passed) {
    std::cerr << "contraction: cost exceeded the transported bound at a checkpoint\n";
    return 1;
  }
  return 0;
}

int cmd_invariant(const fpot::ExperimentConfig& cfg) {
  const fpot::InvariantReport report = fpot::run_invariant(cfg);
  fpot::write_invariant_outputs(report, cfg.out_dir);
  for (const fpot::InvariantRow& row : report.rows) {
    std::printf("t=%-8.5g  cost=%.12g  w=%.12g\n", row.t, row.cost, row.w_value);
  }
  std::printf("fitted rate %.6g, target %.6g%s\n", report.fitted_rate, report.target_rate,
              report.degenerate_fit ? " (started at the invariant measure)" : "");
  std::printf("report: %s/report.csv\n", cfg.out_dir.c_str());
  if (!report.passed) {
    std::cerr << "rate: decay toward the invariant measure is slower than the target\n";
    return 1;
  }
  return 0;
}

int cmd_replay(const fpot::ExperimentConfig& cfg) {
  const fpot::ReplayReport report = fpot::replay_dual_proof(cfg);
  fpot::write_replay_outputs(report, cfg.out_dir);
  std::printf("rescaled horizon s1 = %.12g (t = %.6g)\n", report.s1, report.t_end);
  std::printf("cost_s1 = %.12g  pairing_s1 = %.12g\n", report.cost_s1, report.sigma_pair_s1);
  std::printf("cost_s0 = %.12g  pairing_s0 = %.12g\n", report.cost_s0, report.sigma_pair_s0);
  std::printf("constraint violation: %.3e at s1, %.3e at s0\n", report.viol_s1, report.viol_s0);
  std::printf("chain slack = %.6e (K = %.6e, ell = %.6g)\n", report.chain_slack, report.k_used,
              report.ell);
  std::printf("report: %s/replay_report.txt\n", cfg.out_dir.c_str());
  if (!report.failed_stage.empty()) {
    std::cerr << report.failed_stage << ": replay stage missed its tolerance\n";
    return 1;
  }
  return 0;
}

int cmd_selftest() {
  bool all = true;
  for (const auto& [name, passed] : fpot::selftest_suite()) {
    std::printf("%s  %s\n", passed ? "pass" : "FAIL", name.c_str());
    all = all && passed;
  }
  if (!all) {
    std::cerr << "selftest: a closed-form oracle check failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fokker-Planck contraction experiments with exact transport certificates"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path;
  std::string report_path;

  CLI::App* run = app.add_subcommand("run", "evolve two laws and verify the contraction bound");
  run->add_option("config", config_path, "experiment config file")->required();
  add_override_flags(run, &ov);

  CLI::App* invariant =
      app.add_subcommand("invariant", "measure the decay rate toward the invariant measure");
  invariant->add_option("config", config_path, "experiment config file")->required();
  add_override_flags(invariant, &ov);

  CLI::App* replay =
      app.add_subcommand("replay", "replay the dual comparison chain at the final checkpoint");
  replay->add_option("config", config_path, "experiment config file")->required();
  add_override_flags(replay, &ov);

  app.add_subcommand("selftest", "run the closed-form oracle checks");

  CLI::App* plotdata =
      app.add_subcommand("plotdata", "regenerate plotdata/*.csv from an existing report");
  plotdata->add_option("report", report_path, "report.csv written by a run")->required();
  plotdata->add_option("--out", ov.out_dir, "output directory (default: alongside the report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(load_config(config_path, run, ov));
    if (invariant->parsed()) return cmd_invariant(load_config(config_path, invariant, ov));
    if (replay->parsed()) return cmd_replay(load_config(config_path, replay, ov));
    if (plotdata->parsed()) {
      std::string dir = ov.out_dir;
      if (plotdata->count("--out") == 0) {
        dir = std::filesystem::path(report_path).parent_path().string();
        if (dir.empty()) dir = ".";
      }
      fpot::plotdata_from_report(report_path, dir);
      std::printf("wrote %s/plotdata\n", dir.c_str());
      return 0;
    }
    return cmd_selftest();
  } catch (const fpot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fpot::StageFailure& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
