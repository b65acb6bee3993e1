#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("sie_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SIE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, sep);) out.push_back(f);
  return out;
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

// Covariates, t, y, mu0, mu1, p_true of a generated file.
const std::string& dataset(const std::string& name, int n, int seed, const std::string& extra = "") {
  static std::map<std::string, std::string> made;
  auto it = made.find(name);
  if (it != made.end()) return it->second;
  const std::string p = path(name);
  REQUIRE(run("generate --n " + std::to_string(n) + " --seed " + std::to_string(seed) + " --out " + p + " " + extra) == 0);
  return made.emplace(name, p).first->second;
}

}  // namespace

TEST_CASE("generate writes a ground-truth CSV deterministically") {
  const std::string a = path("gen_a.csv"), b = path("gen_b.csv");
  REQUIRE(run("generate --n 2000 --seed 7 --out " + a) == 0);
  REQUIRE(run("generate --n 2000 --seed 7 --out " + b) == 0);
  const auto rows = lines(a);
  REQUIRE(rows.size() == 2001);
  const auto header = split(rows[0]);
  for (const char* col : {"t", "y", "mu0", "mu1", "p_true"})
    CHECK(std::find(header.begin(), header.end(), col) != header.end());
  CHECK(slurp(a) == slurp(b));

  CHECK(run("generate --n 1 --seed 7 --out " + path("gen_c.csv")) == 2);
  CHECK(run("generate --n 10 --dgp nonsense --out " + path("gen_d.csv")) == 2);
}

TEST_CASE("estimate: oracle null at delta 1 and outputs") {
  const std::string& d = dataset("est.csv", 4000, 11);
  const std::string out = path("est_out");
  REQUIRE(run("estimate --input " + d + " --out-dir " + out + " --oracle-nuisance --delta 1") == 0);
  const auto report = nlohmann::json::parse(slurp(fs::path(out) / "report.json"));
  // Null band: 3 SE(y) / sqrt(n).
  std::vector<double> y;
  const auto rows = lines(d);
  const auto header = split(rows[0]);
  const auto y_col = std::find(header.begin(), header.end(), "y") - header.begin();
  for (std::size_t i = 1; i < rows.size(); ++i) y.push_back(std::stod(split(rows[i])[static_cast<std::size_t>(y_col)]));
  double m = 0.0, s = 0.0;
  for (double v : y) m += v;
  m /= static_cast<double>(y.size());
  for (double v : y) s += (v - m) * (v - m);
  const double se = std::sqrt(s / static_cast<double>(y.size() - 1)) / std::sqrt(static_cast<double>(y.size()));
  CHECK(std::abs(report["tau_sie"].get<double>()) < 3.0 * se);

  for (const char* key : {"psi_hat", "tau_sie", "tau_ate_plugin", "tau_alg1", "delta", "k", "seed", "n",
                          "positivity_clip_fraction", "per_fold"})
    CHECK(report.contains(key));
  CHECK(report["n"] == 4000);
  REQUIRE(report["estimators"].size() == 4);
  for (const auto& e : report["estimators"]) CHECK(e.contains("eps_ate"));
  const auto table = lines(fs::path(out) / "baselines.csv");
  CHECK(table[0] == "estimator,metric,value");
  CHECK(table.size() == 9);
}

TEST_CASE("estimate: delta grid is monotone when the treated arm dominates") {
  const std::string& d = dataset("lin.csv", 2000, 12, "--dgp linear");
  for (const char* mode : {"--oracle-nuisance", ""}) {
    const std::string out = path(std::string("grid_out") + (*mode ? "_oracle" : "_fit"));
    REQUIRE(run("estimate --input " + d + " --out-dir " + out + " --delta-grid 0.25,0.5,1,2,4 " + mode) == 0);
    const auto rows = lines(fs::path(out) / "delta_grid.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "delta,psi_hat");
    double prev = -1e300;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double psi = std::stod(split(rows[i])[1]);
      CHECK(psi >= prev);
      prev = psi;
    }
  }
}

TEST_CASE("estimate: determinism, model dump and validation exits") {
  const std::string& d = dataset("det.csv", 1500, 13);
  const std::string a = path("det_a"), b = path("det_b");
  const std::string flags = " --seed 5 --delta 2 --delta-grid 0.5,2 --basis poly2rbf --dump-models --jobs 2";
  REQUIRE(run("estimate --input " + d + " --out-dir " + a + flags) == 0);
  REQUIRE(run("estimate --input " + d + " --out-dir " + b + flags) == 0);
  for (const char* f : {"report.json", "baselines.csv", "delta_grid.csv", "models.json"})
    CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));
  CHECK(nlohmann::json::parse(slurp(fs::path(a) / "models.json")).size() == 5);

  // Missing outcome column.
  std::ofstream(path("no_y.csv")) << "x1,t\n0.1,0\n0.2,1\n0.3,0\n0.4,1\n";
  CHECK(run("estimate --input " + path("no_y.csv") + " --out-dir " + path("no_y")) == 2);
  CHECK(run("estimate --input " + path("missing.csv") + " --out-dir " + path("missing")) == 2);
  CHECK(run("estimate --input " + d + " --out-dir " + path("bad_delta") + " --delta -1") == 2);
  CHECK(run("estimate --input " + d + " --out-dir " + path("bad_basis") + " --basis cubic") == 2);
  CHECK(run("estimate --input " + d + " --out-dir " + path("bad_k") + " --k 1") == 2);

  // Ground truth stripped: no eps_ate, oracle mode refused.
  std::ofstream(path("nt.csv")) << "x1,t,y\n0.1,0,1\n0.2,1,2\n0.3,0,1\n0.4,1,3\n0.5,0,0\n0.6,1,2\n0.7,0,1\n0.8,1,4\n"
                                   "0.9,0,1\n1.0,1,2\n1.1,0,2\n1.2,1,3\n";
  REQUIRE(run("estimate --input " + path("nt.csv") + " --out-dir " + path("nt_out") + " --k 2 --outcome linear") == 0);
  const auto report = nlohmann::json::parse(slurp(fs::path(path("nt_out")) / "report.json"));
  CHECK_FALSE(report.contains("ground_truth"));
  for (const auto& e : report["estimators"]) CHECK_FALSE(e.contains("eps_ate"));
  CHECK(run("estimate --input " + path("nt.csv") + " --out-dir " + path("nt_oracle") + " --oracle-nuisance") == 2);
}

TEST_CASE("config file mirrors flags and flags win") {
  const std::string& d = dataset("cfg.csv", 1000, 14);
  std::ofstream(path("run.toml")) << "[estimate]\nk = 3\ndelta = 2.0\n";
  REQUIRE(run("--config " + path("run.toml") + " estimate --input " + d + " --out-dir " + path("cfg_a")) == 0);
  auto report = nlohmann::json::parse(slurp(fs::path(path("cfg_a")) / "report.json"));
  CHECK(report["k"] == 3);
  CHECK(report["delta"] == 2.0);
  REQUIRE(run("--config " + path("run.toml") + " estimate --input " + d + " --out-dir " + path("cfg_b") + " --k 4") == 0);
  report = nlohmann::json::parse(slurp(fs::path(path("cfg_b")) / "report.json"));
  CHECK(report["k"] == 4);

  std::ofstream(path("bad.toml")) << "[estimate]\nfolds = 3\n";
  CHECK(run("--config " + path("bad.toml") + " estimate --input " + d + " --out-dir " + path("cfg_c")) == 2);
}

TEST_CASE("optimize: log length, no-op search and determinism") {
  const std::string& d = dataset("opt.csv", 1500, 15);
  const std::string a = path("opt_a"), b = path("opt_b"), z = path("opt_zero");
  REQUIRE(run("optimize --input " + d + " --out-dir " + a + " --steps 7 --seed 2") == 0);
  REQUIRE(run("optimize --input " + d + " --out-dir " + b + " --steps 7 --seed 2 --jobs 3") == 0);
  CHECK(lines(fs::path(a) / "optimize_log.jsonl").size() == 7);
  for (const char* f : {"lambda.csv", "optimize_log.jsonl", "policy_values.json", "policy_values.csv"})
    CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));

  const auto first = nlohmann::json::parse(lines(fs::path(a) / "optimize_log.jsonl")[0]);
  for (const char* key : {"step", "best_reward", "mean_reward", "update_norm"}) CHECK(first.contains(key));

  REQUIRE(run("optimize --input " + d + " --out-dir " + z + " --steps 0 --seed 2") == 0);
  CHECK(lines(fs::path(z) / "optimize_log.jsonl").empty());
  const auto rows = lines(fs::path(z) / "lambda.csv");
  REQUIRE(rows.size() == 1501);
  CHECK(split(rows[0])[2] == "lambda");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(split(rows[i])[2]) == 0.0);
  const auto pv = nlohmann::json::parse(slurp(fs::path(z) / "policy_values.json"));
  CHECK(pv["initial_reward"] == pv["final_reward"]);
  std::vector<std::string> names;
  for (const auto& p : pv["policies"]) names.push_back(p["policy"]);
  CHECK(names == std::vector<std::string>{"RS-SIO", "SMA-linear", "SMA-gbstumps", "random"});

  CHECK(run("optimize --input " + d + " --out-dir " + path("opt_bad") + " --directions 4 --top 5") == 2);
}

TEST_CASE("optimize: non-finite rewards exit as numerical failures") {
  std::ostringstream csv;
  csv << "x1,t,y\n";
  for (int i = 0; i < 40; ++i) csv << (i * 0.1) << "," << (i % 2) << "," << (i % 3 == 0 ? "1e308" : "1") << "\n";
  std::ofstream(path("huge.csv")) << csv.str();
  CHECK(run("optimize --input " + path("huge.csv") + " --out-dir " + path("huge") + " --steps 2 --k 2") == 3);
}

TEST_CASE("bench: aggregate tables, conditional columns and partial failure") {
  const fs::path reps = scratch() / "reps";
  fs::create_directories(reps);
  for (int r = 0; r < 3; ++r)
    REQUIRE(run("generate --n 600 --seed " + std::to_string(20 + r) + " --out " + (reps / ("rep_" + std::to_string(r) + ".csv")).string()) == 0);
  const std::string a = path("bench_a"), b = path("bench_b");
  REQUIRE(run("bench --input " + reps.string() + " --out-dir " + a + " --jobs 2") == 0);
  REQUIRE(run("bench --input " + reps.string() + " --out-dir " + b + " --jobs 1") == 0);
  for (const char* f : {"bench_rows.csv", "bench_summary.csv", "bench_summary.json", "failures.csv"})
    CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));

  const auto summary = lines(fs::path(a) / "bench_summary.csv");
  REQUIRE(summary.size() == 5);
  CHECK(summary[0].find("eps_ate_mean") != std::string::npos);
  std::vector<std::string> names;
  for (std::size_t i = 1; i < summary.size(); ++i) {
    const auto f = split(summary[i]);
    names.push_back(f[0]);
    CHECK(f[1] == "3");
  }
  CHECK(names == std::vector<std::string>{"SIE", "OLS", "IPW", "AIPW"});
  CHECK(lines(fs::path(a) / "timings.csv").size() == 13);

  // Ground truth removed: psi columns stay, eps columns go.
  const fs::path plain = scratch() / "plain";
  fs::create_directories(plain);
  for (int r = 0; r < 2; ++r) {
    std::ofstream out(plain / ("rep_" + std::to_string(r) + ".csv"));
    for (const auto& line : lines(reps / ("rep_" + std::to_string(r) + ".csv"))) {
      const auto f = split(line);
      for (std::size_t c = 0; c + 3 < f.size(); ++c) out << (c ? "," : "") << f[c];
      out << "\n";
    }
  }
  REQUIRE(run("bench --input " + plain.string() + " --out-dir " + path("bench_plain")) == 0);
  const auto header = lines(fs::path(path("bench_plain")) / "bench_summary.csv")[0];
  CHECK(header.find("eps_ate") == std::string::npos);
  CHECK(header.find("psi_hat_mean") != std::string::npos);

  std::ofstream(plain / "rep_9.csv") << "x1,t,y\n1,2,3\n";
  CHECK(run("bench --input " + plain.string() + " --out-dir " + path("bench_partial")) == 4);
  CHECK(lines(fs::path(path("bench_partial")) / "failures.csv").size() == 2);
  CHECK(run("bench --input " + path("nowhere") + " --out-dir " + path("bench_none")) == 2);
}
