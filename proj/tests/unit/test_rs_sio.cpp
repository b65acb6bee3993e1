#include "sie/error.hpp"
#include "sie/estimator.hpp"
#include "sie/rs_sio.hpp"
#include "sie/synthetic.hpp"
#include "support/oracles.hpp"
#include "support/rs_reference.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace sie;

namespace {

PreparedUnits toy_units() {
  PreparedUnits u;
  u.p_hat = Eigen::Vector3d(0.3, 0.5, 0.8);
  u.m0 = Eigen::Vector3d(1.0, -0.5, 2.0);
  u.m1 = Eigen::Vector3d(2.5, 0.5, 1.0);
  u.y = Eigen::Vector3d(1.5, 0.0, 1.2);
  return u;
}

std::vector<double> steps_prefix(const PreparedUnits& u, RsConfig cfg, int steps) {
  cfg.steps = steps;
  return optimize(u, cfg).params;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io_error;
}

}  // namespace

TEST_CASE("reward examples") {
  const Dataset ds = make_synthetic(default_dgp(), 1000, 41);
  SieOptions opt;
  opt.seed = 41;
  const NuisanceFit fit = fit_nuisances(ds, opt);
  const PreparedUnits u = prepare_units(ds, fit.estimates);
  const std::vector<double> zero(1000, 0.0);
  const SieReport r = summarize_sie(ds, fit, opt);
  CHECK(reward(u, zero) == doctest::Approx(1000.0 * r.psi_hat).epsilon(1e-13));

  PreparedUnits one;
  one.p_hat = Eigen::VectorXd::Constant(1, 0.5);
  one.m0 = Eigen::VectorXd::Constant(1, 1.0);
  one.m1 = Eigen::VectorXd::Constant(1, 5.0);
  one.y = Eigen::VectorXd::Constant(1, 4.0);
  const std::vector<double> lam{std::log(1.5)};
  CHECK(reward(one, lam) == doctest::Approx(3.4).epsilon(1e-12));

  PreparedUnits flat = u;
  flat.m0.setConstant(0.75);
  flat.m1.setConstant(0.75);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 3.0);
  std::vector<double> any(1000);
  for (double& v : any) v = z(rng);
  CHECK(reward(flat, any) == doctest::Approx(750.0).epsilon(1e-12));
}

TEST_CASE("zero steps is the identity") {
  RsConfig cfg;
  cfg.steps = 0;
  const OptimizeResult r = optimize(toy_units(), cfg);
  CHECK(r.params == std::vector<double>(3, 0.0));
  CHECK(r.trajectory.empty());
  CHECK(r.final_reward == r.initial_reward);
}

TEST_CASE("symmetric rewards give an exactly zero update") {
  PreparedUnits u = toy_units();
  u.m1 = u.m0;
  RsConfig cfg;
  cfg.steps = 10;
  cfg.directions = 6;
  cfg.top = 3;
  const OptimizeResult r = optimize(u, cfg);
  CHECK(r.params == std::vector<double>(3, 0.0));
  for (const auto& s : r.trajectory) CHECK(s.update_norm == 0.0);
}

TEST_CASE("optimize matches an independent reimplementation step for step") {
  const PreparedUnits u = toy_units();
  for (bool resample : {true, false}) {
    for (auto [m, b] : {std::pair{4, 4}, std::pair{5, 2}, std::pair{1, 1}}) {
      RsConfig cfg;
      cfg.alpha = 0.3;
      cfg.nu = 0.1;
      cfg.steps = 12;
      cfg.directions = m;
      cfg.top = b;
      cfg.resample_directions = resample;
      cfg.seed = 99;
      cfg.exec = Exec::serial;
      const auto ref = oracle::reference_search(u, cfg);
      for (int s = 1; s <= cfg.steps; ++s) {
        const auto got = steps_prefix(u, cfg, s);
        for (int i = 0; i < 3; ++i) {
          CAPTURE(resample);
          CAPTURE(m);
          CAPTURE(b);
          CAPTURE(s);
          CHECK(std::abs(got[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(s - 1)][static_cast<std::size_t>(i)]) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("trajectory records and determinism") {
  const PreparedUnits u = toy_units();
  RsConfig cfg;
  cfg.steps = 20;
  cfg.directions = 8;
  cfg.top = 3;
  cfg.seed = 5;
  const OptimizeResult a = optimize(u, cfg);
  const OptimizeResult b = optimize(u, cfg);
  cfg.exec = Exec::serial;
  const OptimizeResult c = optimize(u, cfg);
  CHECK(a.params == b.params);
  CHECK(a.params == c.params);
  REQUIRE(a.trajectory.size() == 20);
  for (std::size_t s = 0; s < a.trajectory.size(); ++s) {
    CHECK(a.trajectory[s].step == static_cast<int>(s) + 1);
    CHECK(a.trajectory[s].best_reward >= a.trajectory[s].mean_reward);
    CHECK(a.trajectory[s].reward == b.trajectory[s].reward);
  }
  CHECK(a.final_reward == reward(u, a.params));
}

TEST_CASE("normalized rewards and raw degrees") {
  const PreparedUnits u = toy_units();
  RsConfig cfg;
  cfg.steps = 5;
  cfg.directions = 6;
  cfg.top = 2;
  cfg.normalize_rewards = true;
  const OptimizeResult r = optimize(u, cfg);
  for (const auto& s : r.trajectory) CHECK(std::isfinite(s.update_norm));

  cfg.normalize_rewards = false;
  cfg.raw_delta = true;
  const OptimizeResult raw = optimize(u, cfg);
  CHECK(raw.map == ParamMap::raw_clamped);
  for (double l : raw.log_deltas()) {
    CHECK(l >= std::log(kRawDeltaMin));
    CHECK(l <= std::log(kRawDeltaMax));
  }
}

TEST_CASE("config validation") {
  const PreparedUnits u = toy_units();
  auto run = [&](auto mutate) {
    RsConfig cfg;
    mutate(cfg);
    return code_of([&] { optimize(u, cfg); });
  };
  CHECK(run([](RsConfig& c) { c.top = 33; }) == ErrorCode::invalid_config);
  CHECK(run([](RsConfig& c) { c.top = 0; }) == ErrorCode::invalid_config);
  CHECK(run([](RsConfig& c) { c.alpha = 0.0; }) == ErrorCode::invalid_config);
  CHECK(run([](RsConfig& c) { c.nu = -1.0; }) == ErrorCode::invalid_config);
  CHECK(run([](RsConfig& c) { c.steps = -1; }) == ErrorCode::invalid_config);
  CHECK(run([](RsConfig& c) { c.directions = 0; }) == ErrorCode::invalid_config);
}

TEST_CASE("non-finite rewards abort with the step index") {
  PreparedUnits u = toy_units();
  u.m1[1] = std::numeric_limits<double>::infinity();
  RsConfig cfg;
  cfg.steps = 3;
  try {
    optimize(u, cfg);
    FAIL("expected NonFiniteReward");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite_reward);
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}

TEST_CASE("search moves degrees toward the better arm on the default DGP") {
  const Dataset ds = make_synthetic(default_dgp(), 2000, 43);
  const PreparedUnits u = prepare_units(ds, oracle_estimates(ds));
  RsConfig cfg;
  cfg.seed = 43;
  const OptimizeResult r = optimize(u, cfg);
  CHECK(r.final_reward >= r.initial_reward);
  double up = 0.0, down = 0.0;
  int n_up = 0, n_down = 0;
  for (Index i = 0; i < ds.n(); ++i) {
    const double l = r.params[static_cast<std::size_t>(i)];
    if (ds.truth->mu1[i] > ds.truth->mu0[i]) {
      up += l;
      ++n_up;
    } else {
      down += l;
      ++n_down;
    }
  }
  REQUIRE(n_up > 0);
  REQUIRE(n_down > 0);
  CHECK(up / n_up > down / n_down);
}

TEST_CASE("policy value examples") {
  const std::vector<double> y{2.0, 4.0};
  const std::vector<int> t{1, 0};
  const std::vector<double> half{0.5, 0.5};
  CHECK(policy_value(y, t, std::vector<int>{1, 1}, half) == doctest::Approx(2.0).epsilon(1e-15));
  const std::vector<double> sure{1.0, 0.0};
  CHECK(policy_value(y, t, t, sure) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(policy_value(y, t, std::vector<int>{0, 1}, half) == 0.0);
  CHECK(code_of([&] { policy_value(y, t, std::vector<int>{1}, half); }) == ErrorCode::length_mismatch);
}

TEST_CASE("delta to policy examples") {
  const std::vector<double> p{0.2, 0.6, 0.4};
  CHECK(delta_to_policy(std::vector<double>(3, 50.0), p) == std::vector<int>{1, 1, 1});
  CHECK(delta_to_policy(std::vector<double>(3, 0.0), p) == std::vector<int>{0, 1, 0});
  CHECK(delta_to_policy(std::vector<double>(1, std::log(1.5)), std::vector<double>{0.4}) == std::vector<int>{1});
  CHECK(code_of([&] { delta_to_policy(std::vector<double>(2, 0.0), p); }) == ErrorCode::length_mismatch);
}

TEST_CASE("lambda map reproduces a covariate step") {
  const Dataset ds = make_synthetic(default_dgp(), 1000, 44);
  std::vector<double> lam(1000);
  for (Index i = 0; i < ds.n(); ++i) lam[static_cast<std::size_t>(i)] = ds.x(i, 2) > 0.0 ? 0.5 : -0.5;
  const LambdaMap map = fit_lambda_map(ds.x, lam);
  const auto pred = map.predict(ds.x);
  int agree = 0;
  for (std::size_t i = 0; i < lam.size(); ++i) agree += (pred[i] > 0.0) == (lam[i] > 0.0);
  CHECK(agree >= 990);
  CHECK(code_of([&] { fit_lambda_map(ds.x, std::vector<double>(3, 0.0)); }) == ErrorCode::length_mismatch);
}
