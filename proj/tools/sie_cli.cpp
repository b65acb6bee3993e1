#include "commands.hpp"

#include "sie/error.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace sie;
using namespace sie::cli;

namespace {

void add_common(CLI::App* sub, CommonArgs& a, bool input_is_dir = false) {
  sub->add_option("--input", a.input, input_is_dir ? "Directory of replication CSVs" : "Input CSV")->required();
  sub->add_option("--out-dir", a.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--seed", a.seed, "Seed for folds, splits and searches")->capture_default_str();
  sub->add_option("--k", a.k, "Cross-fitting folds")->capture_default_str();
  sub->add_option("--delta", a.delta, "Global intervention degree")->capture_default_str();
  sub->add_option("--basis", a.basis, "Propensity basis")
      ->check(CLI::IsMember({"raw", "poly2", "poly2rbf"}))
      ->capture_default_str();
  sub->add_option("--outcome", a.outcome, "Outcome learner")
      ->check(CLI::IsMember({"linear", "gbstumps"}))
      ->capture_default_str();
  sub->add_flag("--oracle-nuisance", a.oracle_nuisance, "Use ground-truth nuisances");
  sub->add_flag("--within-fold", a.within_fold, "Fit nuisances on the evaluation fold itself");
  sub->add_option("--jobs", a.jobs, "Threads (0: OpenMP default)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic intervention effect estimation and optimization"};
  app.set_config("--config", "", "TOML file mirroring the flags; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset with ground truth");
  generate->add_option("--n", gen.n, "Units")->required();
  generate->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  generate->add_option("--out", gen.out, "Output CSV")->required();
  generate->add_option("--dgp", gen.dgp, "Data-generating process")
      ->check(CLI::IsMember({"default", "linear", "randomized", "sign_x3"}))
      ->capture_default_str();
  generate->add_option("--sigma", gen.sigma, "Outcome noise std")->capture_default_str();
  generate->add_option("--confounding", gen.confounding, "Propensity log-odds scale")->capture_default_str();

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the intervention effect and ATE baselines");
  add_common(estimate, est.common);
  estimate->add_option("--delta-grid", est.delta_grid, "Comma-separated degrees for a psi_hat sweep")->delimiter(',');
  estimate->add_option("--baselines", est.baselines, "Comma-separated subset of ols,ipw,aipw")
      ->delimiter(',')
      ->capture_default_str();
  estimate->add_flag("--ipw-normalized", est.ipw_normalized, "Self-normalized IPW weights");
  estimate->add_flag("--dump-models", est.dump_models, "Write fitted nuisance models to models.json");

  OptimizeArgs opt;
  bool fixed_directions = false;
  auto* optimize_cmd = app.add_subcommand("optimize", "Search per-unit degrees and evaluate policies");
  add_common(optimize_cmd, opt.common);
  optimize_cmd->add_option("--alpha", opt.rs.alpha, "Step size")->capture_default_str();
  optimize_cmd->add_option("--nu", opt.rs.nu, "Exploration noise std")->capture_default_str();
  optimize_cmd->add_option("--steps", opt.rs.steps, "Search steps")->capture_default_str();
  optimize_cmd->add_option("--directions", opt.rs.directions, "Directions per step")->capture_default_str();
  optimize_cmd->add_option("--top", opt.rs.top, "Directions kept per update")->capture_default_str();
  optimize_cmd->add_flag("--fixed-directions", fixed_directions, "Draw directions once instead of every step");
  optimize_cmd->add_flag("--normalize-rewards", opt.rs.normalize_rewards, "Scale updates by the reward std");
  optimize_cmd->add_flag("--raw-delta", opt.rs.raw_delta, "Search raw degrees clamped to [1e-3, 1e3]");
  optimize_cmd->add_option("--test-fraction", opt.test_fraction, "Held-out share")->capture_default_str();
  optimize_cmd->add_option("--threshold", opt.threshold, "Treat when q >= threshold")->capture_default_str();
  optimize_cmd->add_option("--random-p", opt.random_p, "Treatment rate of the random policy")->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run estimate over a directory of replications");
  add_common(bench_cmd, bench.common, true);
  bench_cmd->add_option("--baselines", bench.baselines, "Comma-separated subset of ols,ipw,aipw")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_flag("--ipw-normalized", bench.ipw_normalized, "Self-normalized IPW weights");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*estimate) return run_estimate(est);
    if (*optimize_cmd) {
      opt.rs.resample_directions = !fixed_directions;
      return run_optimize(opt);
    }
    if (*bench_cmd) return run_bench(bench);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.error_class() == ErrorClass::numerical ? kExitNumerical : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
