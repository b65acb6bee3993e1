#include "commands.hpp"

#include "sie/baselines.hpp"
#include "sie/csv_io.hpp"
#include "sie/error.hpp"
#include "sie/estimator.hpp"
#include "sie/model_io.hpp"
#include "sie/summation.hpp"
#include "sie/synthetic.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace sie::cli {
namespace {

namespace fs = std::filesystem;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create directory " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void apply_jobs(int jobs) {
  if (jobs < 0) throw Error(ErrorCode::invalid_config, "--jobs must be >= 0");
  if (jobs > 0) omp_set_num_threads(jobs);
}

SieOptions sie_options(const CommonArgs& a, double delta, Exec exec) {
  SieOptions opt;
  opt.delta = delta;
  opt.k = a.k;
  opt.seed = a.seed;
  opt.oracle_nuisance = a.oracle_nuisance;
  opt.exec = exec;
  opt.nuisance.propensity.basis = basis_kind_from_string(a.basis);
  opt.nuisance.propensity.seed = a.seed;
  opt.nuisance.outcome.learner = outcome_learner_from_string(a.outcome);
  opt.nuisance.within_fold = a.within_fold;
  return opt;
}

std::string display_name(BaselineKind kind) {
  std::string s = to_string(kind);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::vector<BaselineKind> parse_baselines(const std::vector<std::string>& names) {
  std::vector<BaselineKind> kinds;
  for (const auto& name : names) {
    const BaselineKind k = baseline_kind_from_string(name);
    if (k == BaselineKind::sma || k == BaselineKind::random_policy)
      throw Error(ErrorCode::invalid_config, "'" + name + "' is a policy baseline; use the optimize command");
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  return kinds;
}

Json report_to_json(const SieReport& r) {
  Json j;
  j["psi_hat"] = r.psi_hat;
  j["tau_sie"] = r.tau_sie;
  j["tau_ate_plugin"] = r.tau_ate_plugin;
  j["tau_alg1"] = r.tau_alg1;
  j["delta"] = r.delta;
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["positivity_clip_fraction"] = r.positivity_clip_fraction;
  j["per_fold"] = Json::array();
  for (const auto& f : r.per_fold) {
    Json jf;
    jf["fold"] = f.fold;
    jf["n_eval"] = f.n_eval;
    jf["n_fitted_on"] = f.n_fitted_on;
    jf["propensity_converged"] = f.propensity_converged;
    jf["propensity_iterations"] = f.propensity_iterations;
    jf["propensity_gradient_norm"] = f.propensity_gradient_norm;
    jf["clip_fraction"] = f.clip_fraction;
    jf["psi_hat"] = f.psi_hat;
    j["per_fold"].push_back(jf);
  }
  j["oracle_nuisance"] = r.oracle_nuisance;
  j["within_fold"] = r.within_fold;
  j["warnings"] = r.warnings;
  return j;
}

/// mean(q mu1 + (1 - q) mu0) from the ground truth at a global degree.
double psi_oracle(const GroundTruth& g, double delta) {
  std::vector<double> v(static_cast<std::size_t>(g.mu0.size()));
  const double ld = std::log(delta);
  for (Index i = 0; i < g.mu0.size(); ++i) {
    const double q = shifted_propensity(g.p_true[i], ld);
    v[static_cast<std::size_t>(i)] = q * g.mu1[i] + (1.0 - q) * g.mu0[i];
  }
  return pairwise_mean(v);
}

struct EstimatorResult {
  std::string estimator;
  double tau_ate = 0.0;
  std::optional<double> eps_ate;
  double seconds = 0.0;
};

struct EstimateRun {
  SieReport report;
  NuisanceFit fit;
  std::vector<EstimatorResult> estimators;  // SIE first
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

EstimateRun estimate_all(const Dataset& ds, const CommonArgs& common, const std::vector<BaselineKind>& kinds,
                         bool ipw_normalized, Exec exec) {
  EstimateRun run;
  const SieOptions opt = sie_options(common, common.delta, exec);
  auto t0 = Clock::now();
  run.fit = fit_nuisances(ds, opt);
  run.report = summarize_sie(ds, run.fit, opt);
  EstimatorResult sie{"SIE", run.report.tau_ate_plugin, std::nullopt, seconds_since(t0)};
  if (ds.has_truth()) sie.eps_ate = ate_error(sie.tau_ate, ds);
  run.estimators.push_back(sie);

  BaselineOptions bo;
  bo.k = common.k;
  bo.seed = common.seed;
  bo.nuisance = opt.nuisance;
  bo.ipw_normalized = ipw_normalized;
  bo.exec = exec;
  for (BaselineKind kind : kinds) {
    t0 = Clock::now();
    EstimatorResult r{display_name(kind), estimate_ate_baseline(kind, ds, bo), std::nullopt, 0.0};
    r.seconds = seconds_since(t0);
    if (ds.has_truth()) r.eps_ate = ate_error(r.tau_ate, ds);
    run.estimators.push_back(r);
  }
  return run;
}

void warn(const std::vector<std::string>& warnings, const std::string& context = "") {
  for (const auto& w : warnings) std::cerr << context << w << "\n";
}

std::vector<Index> iota_indices(Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

double fraction_treated(const std::vector<int>& pol) {
  return pol.empty() ? 0.0 : std::accumulate(pol.begin(), pol.end(), 0.0) / static_cast<double>(pol.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = pairwise_mean(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

}  // namespace

int run_generate(const GenerateArgs& args) {
  const DgpSpec spec = dgp_by_name(args.dgp, args.sigma, args.confounding);
  const Dataset ds = make_synthetic(spec, args.n, args.seed);
  const fs::path out(args.out);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_csv(out, ds);
  return kExitOk;
}

int run_estimate(const EstimateArgs& args) {
  apply_jobs(args.common.jobs);
  for (double d : args.delta_grid) StochasticDegree::from_delta(d);
  const auto kinds = parse_baselines(args.baselines);
  const Dataset ds = load_csv(args.common.input);
  const EstimateRun run = estimate_all(ds, args.common, kinds, args.ipw_normalized, Exec::parallel);
  warn(run.report.warnings);

  const fs::path dir(args.common.out_dir);
  ensure_dir(dir);

  Json j = report_to_json(run.report);
  j["input"] = args.common.input;
  j["basis"] = args.common.basis;
  j["outcome"] = args.common.outcome;
  if (ds.has_truth()) {
    Json g;
    g["ate"] = ds.truth->ate();
    if (ds.truth->has_propensity()) g["psi_oracle"] = psi_oracle(*ds.truth, args.common.delta);
    j["ground_truth"] = g;
  }
  j["estimators"] = Json::array();
  for (const auto& e : run.estimators) {
    Json je;
    je["estimator"] = e.estimator;
    je["tau_ate"] = e.tau_ate;
    if (e.eps_ate) je["eps_ate"] = *e.eps_ate;
    j["estimators"].push_back(je);
  }
  write_file(dir / "report.json", dump(j));

  std::ostringstream table;
  table << "estimator,metric,value\n";
  for (const auto& e : run.estimators) {
    table << e.estimator << ",tau_ate," << format_double(e.tau_ate) << "\n";
    if (e.eps_ate) table << e.estimator << ",eps_ate," << format_double(*e.eps_ate) << "\n";
  }
  write_file(dir / "baselines.csv", table.str());

  if (!args.delta_grid.empty()) {
    const auto psi = psi_curve(ds, run.fit.estimates, args.delta_grid);
    std::ostringstream grid;
    grid << "delta,psi_hat\n";
    for (std::size_t i = 0; i < psi.size(); ++i)
      grid << format_double(args.delta_grid[i]) << "," << format_double(psi[i]) << "\n";
    write_file(dir / "delta_grid.csv", grid.str());
  }

  if (args.dump_models) {
    if (args.common.oracle_nuisance) {
      std::cerr << "note: --dump-models ignored in oracle-nuisance mode (nothing is fitted)\n";
    } else {
      Json models = Json::array();
      for (const auto& pair : run.fit.pairs) models.push_back(to_json(pair));
      write_file(dir / "models.json", dump(models));
    }
  }
  return kExitOk;
}

int run_optimize(const OptimizeArgs& args) {
  apply_jobs(args.common.jobs);
  args.rs.validate();
  if (!(args.test_fraction > 0.0 && args.test_fraction < 1.0))
    throw Error(ErrorCode::invalid_config, "--test-fraction must lie in (0, 1)");
  if (!(args.random_p >= 0.0 && args.random_p <= 1.0))
    throw Error(ErrorCode::invalid_config, "--random-p must lie in [0, 1]");
  const Dataset ds = load_csv(args.common.input);
  if (args.common.oracle_nuisance && !(ds.has_truth() && ds.truth->has_propensity()))
    throw Error(ErrorCode::no_ground_truth, "--oracle-nuisance needs mu0, mu1 and p_true columns");

  const TrainTestSplit split = train_test_split(ds, args.test_fraction, args.common.seed);
  const Dataset train = ds.subset(split.train);
  const Dataset test = ds.subset(split.test);

  const SieOptions opt = sie_options(args.common, 1.0, Exec::parallel);
  const NuisanceFit fit = fit_nuisances(train, opt);
  const PreparedUnits units = prepare_units(train, fit.estimates);
  RsConfig rs = args.rs;
  rs.seed = args.common.seed;
  const OptimizeResult result = optimize(units, rs);
  const std::vector<double> train_lambda = result.log_deltas();

  const LambdaMap lambda_map = fit_lambda_map(train.x, train_lambda);
  const std::vector<double> test_lambda = lambda_map.predict(test.x);

  Eigen::VectorXd test_p;
  if (args.common.oracle_nuisance) {
    test_p = test.truth->p_true;
  } else {
    const PropensityModel prop = fit_propensity(train, iota_indices(train.n()), opt.nuisance.propensity);
    test_p = prop.predict_rows(test.x);
  }
  const std::span<const double> p_span(test_p.data(), static_cast<std::size_t>(test_p.size()));
  const std::span<const double> y_span(test.y.data(), static_cast<std::size_t>(test.y.size()));
  const std::span<const int> t_span(test.t.data(), static_cast<std::size_t>(test.t.size()));

  struct NamedPolicy {
    std::string name;
    std::vector<int> policy;
  };
  std::vector<NamedPolicy> policies;
  policies.push_back({"RS-SIO", delta_to_policy(test_lambda, p_span, args.threshold)});
  for (OutcomeLearner l : {OutcomeLearner::least_squares_linear, OutcomeLearner::boosted_stumps}) {
    const SmaModel sma = fit_sma(train, iota_indices(train.n()), l);
    policies.push_back({std::string("SMA-") + to_string(l), sma.policy(test.x)});
  }
  policies.push_back({"random", random_policy(test.n(), args.random_p, args.common.seed)});

  const fs::path dir(args.common.out_dir);
  ensure_dir(dir);

  std::vector<std::string> split_of(static_cast<std::size_t>(ds.n()));
  std::vector<double> lambda_of(static_cast<std::size_t>(ds.n()));
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    split_of[static_cast<std::size_t>(split.train[i])] = "train";
    lambda_of[static_cast<std::size_t>(split.train[i])] = train_lambda[i];
  }
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    split_of[static_cast<std::size_t>(split.test[i])] = "test";
    lambda_of[static_cast<std::size_t>(split.test[i])] = test_lambda[i];
  }
  std::ostringstream lam;
  lam << "unit,split,lambda\n";
  for (Index i = 0; i < ds.n(); ++i)
    lam << i << "," << split_of[static_cast<std::size_t>(i)] << "," << format_double(lambda_of[static_cast<std::size_t>(i)])
        << "\n";
  write_file(dir / "lambda.csv", lam.str());

  std::ostringstream log;
  for (const auto& s : result.trajectory) {
    Json line;
    line["step"] = s.step;
    line["reward"] = s.reward;
    line["best_reward"] = s.best_reward;
    line["mean_reward"] = s.mean_reward;
    line["update_norm"] = s.update_norm;
    log << line.dump() << "\n";
  }
  write_file(dir / "optimize_log.jsonl", log.str());

  Json j;
  j["input"] = args.common.input;
  j["seed"] = args.common.seed;
  j["n"] = ds.n();
  j["n_train"] = train.n();
  j["n_test"] = test.n();
  j["oracle_nuisance"] = args.common.oracle_nuisance;
  j["steps"] = rs.steps;
  j["alpha"] = rs.alpha;
  j["nu"] = rs.nu;
  j["directions"] = rs.directions;
  j["top"] = rs.top;
  j["resample_directions"] = rs.resample_directions;
  j["normalize_rewards"] = rs.normalize_rewards;
  j["raw_delta"] = rs.raw_delta;
  j["threshold"] = args.threshold;
  j["initial_reward"] = result.initial_reward;
  j["final_reward"] = result.final_reward;
  j["policies"] = Json::array();
  std::ostringstream table;
  table << "policy,metric,value\n";
  for (const auto& p : policies) {
    Json jp;
    jp["policy"] = p.name;
    jp["value"] = policy_value(y_span, t_span, p.policy, p_span);
    jp["treated_fraction"] = fraction_treated(p.policy);
    if (test.has_truth()) {
      std::vector<double> v(p.policy.size());
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = p.policy[i] == 1 ? test.truth->mu1[static_cast<Index>(i)] : test.truth->mu0[static_cast<Index>(i)];
      jp["true_value"] = pairwise_mean(v);
    }
    for (const auto& [key, value] : jp.items())
      if (key != "policy") table << p.name << "," << key << "," << format_double(value.get<double>()) << "\n";
    j["policies"].push_back(jp);
  }
  write_file(dir / "policy_values.json", dump(j));
  write_file(dir / "policy_values.csv", table.str());
  return kExitOk;
}

int run_bench(const BenchArgs& args) {
  apply_jobs(args.common.jobs);
  const auto kinds = parse_baselines(args.baselines);
  const fs::path in_dir(args.common.input);
  if (!fs::is_directory(in_dir)) throw Error(ErrorCode::io_error, "--input must be a directory of CSV files: " + in_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::invalid_config, "no .csv replications in " + in_dir.string());

  struct Replication {
    bool ok = false;
    bool has_truth = false;
    std::string error;
    std::vector<EstimatorResult> estimators;
    double psi_hat = 0.0;
    double tau_sie = 0.0;
    std::vector<std::string> warnings;
  };
  const int n_rep = static_cast<int>(files.size());
  std::vector<Replication> reps(static_cast<std::size_t>(n_rep));
  const int jobs = args.common.jobs > 0 ? args.common.jobs : omp_get_max_threads();
  // Replications run side by side; each one then stays on its own thread.
  const Exec inner = jobs > 1 ? Exec::serial : Exec::parallel;

#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (int r = 0; r < n_rep; ++r) {
    Replication& rep = reps[static_cast<std::size_t>(r)];
    try {
      const Dataset ds = load_csv(files[static_cast<std::size_t>(r)]);
      CommonArgs common = args.common;
      common.seed = args.common.seed + static_cast<std::uint64_t>(r);
      const EstimateRun run = estimate_all(ds, common, kinds, args.ipw_normalized, inner);
      rep.estimators = run.estimators;
      rep.psi_hat = run.report.psi_hat;
      rep.tau_sie = run.report.tau_sie;
      rep.warnings = run.report.warnings;
      rep.has_truth = ds.has_truth();
      rep.ok = true;
    } catch (const std::exception& e) {
      rep.error = e.what();
    }
  }

  std::vector<std::string> names{"SIE"};
  for (BaselineKind k : kinds) names.push_back(display_name(k));
  bool all_truth = true;
  int n_ok = 0;
  for (const auto& rep : reps) {
    if (!rep.ok) continue;
    ++n_ok;
    all_truth = all_truth && rep.has_truth;
  }

  std::ostringstream rows, timings, failures;
  rows << "replication,file,estimator,metric,value\n";
  timings << "replication,file,estimator,seconds\n";
  failures << "replication,file,error\n";
  std::map<std::string, std::map<std::string, std::vector<double>>> series;
  std::map<std::string, std::vector<double>> seconds;
  for (int r = 0; r < n_rep; ++r) {
    const auto& rep = reps[static_cast<std::size_t>(r)];
    const std::string file = files[static_cast<std::size_t>(r)].filename().string();
    if (!rep.ok) {
      std::string msg = rep.error;
      std::replace(msg.begin(), msg.end(), '"', '\'');
      failures << r << "," << file << ",\"" << msg << "\"\n";
      std::cerr << "replication " << r << " (" << file << ") failed: " << rep.error << "\n";
      continue;
    }
    warn(rep.warnings, "replication " + std::to_string(r) + ": ");
    auto emit = [&](const std::string& est, const std::string& metric, double v) {
      rows << r << "," << file << "," << est << "," << metric << "," << format_double(v) << "\n";
      series[est][metric].push_back(v);
    };
    for (const auto& e : rep.estimators) {
      if (e.estimator == "SIE") {
        emit(e.estimator, "psi_hat", rep.psi_hat);
        emit(e.estimator, "tau_sie", rep.tau_sie);
      }
      emit(e.estimator, "tau_ate", e.tau_ate);
      if (all_truth && e.eps_ate) emit(e.estimator, "eps_ate", *e.eps_ate);
      timings << r << "," << file << "," << e.estimator << "," << format_double(e.seconds) << "\n";
      seconds[e.estimator].push_back(e.seconds);
    }
  }

  std::vector<std::string> metrics{"tau_ate"};
  if (all_truth && n_ok > 0) metrics.push_back("eps_ate");
  metrics.push_back("psi_hat");

  std::ostringstream summary;
  summary << "estimator,replications";
  for (const auto& m : metrics) summary << "," << m << "_mean," << m << "_std";
  summary << "\n";
  Json js;
  js["input"] = args.common.input;
  js["replications"] = n_rep;
  js["succeeded"] = n_ok;
  js["failed"] = n_rep - n_ok;
  js["estimators"] = Json::array();
  for (const auto& name : names) {
    const auto& s = series[name];
    const auto count = s.count("tau_ate") ? s.at("tau_ate").size() : 0;
    summary << name << "," << count;
    Json je;
    je["estimator"] = name;
    je["replications"] = count;
    for (const auto& m : metrics) {
      const auto it = s.find(m);
      if (it == s.end() || it->second.empty()) {
        summary << ",,";
        continue;
      }
      const double mean = pairwise_mean(it->second);
      const double sd = sample_std(it->second);
      summary << "," << format_double(mean) << "," << format_double(sd);
      je[m] = {{"mean", mean}, {"std", sd}};
    }
    summary << "\n";
    js["estimators"].push_back(je);
  }

  std::ostringstream timing_summary;
  timing_summary << "estimator,replications,seconds_mean,seconds_std\n";
  for (const auto& name : names) {
    const auto& v = seconds[name];
    timing_summary << name << "," << v.size() << ","
                   << (v.empty() ? std::string() : format_double(pairwise_mean(v))) << ","
                   << (v.empty() ? std::string() : format_double(sample_std(v))) << "\n";
  }

  const fs::path dir(args.common.out_dir);
  ensure_dir(dir);
  write_file(dir / "bench_rows.csv", rows.str());
  write_file(dir / "bench_summary.csv", summary.str());
  write_file(dir / "bench_summary.json", dump(js));
  write_file(dir / "failures.csv", failures.str());
  write_file(dir / "timings.csv", timings.str());
  write_file(dir / "timings_summary.csv", timing_summary.str());
  return n_ok == n_rep ? kExitOk : kExitPartialBench;
}

}  // namespace sie::cli
