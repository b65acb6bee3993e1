#pragma once

#include "sie/exec.hpp"
#include "sie/kernels.hpp"
#include "sie/outcome.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sie {

/// Random-search settings. Validated by validate(); b <= m is required.
struct RsConfig {
  double alpha = 0.02;  // step size
  double nu = 0.05;     // exploration noise std
  int steps = 100;
  int directions = 32;
  int top = 8;
  /// Draw fresh directions every step instead of once before the loop.
  bool resample_directions = true;
  /// Divide the update by the std of the selected rewards.
  bool normalize_rewards = false;
  /// Search over clamped raw degrees (start 0, clamped to 1e-3) instead of
  /// log-degrees (start 0, i.e. delta = 1).
  bool raw_delta = false;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;

  void validate() const;
};

struct StepRecord {
  int step = 0;             // 1-based
  double reward = 0.0;      // reward at the iterate after this step's update
  double best_reward = 0.0; // max over directions of max(plus, minus)
  double mean_reward = 0.0; // mean over all 2m evaluations
  double update_norm = 0.0;
};

struct OptimizeResult {
  /// Search parameter per unit: log-degree, or the raw degree in raw_delta mode.
  std::vector<double> params;
  ParamMap map = ParamMap::log_delta;
  double initial_reward = 0.0;
  double final_reward = 0.0;
  std::vector<StepRecord> trajectory;

  /// Effective per-unit log-degrees.
  std::vector<double> log_deltas() const;
};

/// Sum over units of phi(z_i, delta_i), delta_i = exp(lambda_i).
double reward(const PreparedUnits& units, std::span<const double> lambda, Exec exec = Exec::parallel);

/// Directions are standard normal, drawn row by row (direction k, then unit
/// i) from mt19937_64(cfg.seed). Each step ranks directions by
/// max(plus, minus) descending, ties to the lower index, and moves
///   params += alpha / b * sum_{top b} (plus_k - minus_k) d_k.
/// Throws NonFiniteReward with the step index.
OptimizeResult optimize(const PreparedUnits& units, const RsConfig& cfg);

/// q_i = shifted_propensity(p_i, lambda_i) >= threshold.
std::vector<int> delta_to_policy(std::span<const double> lambda, std::span<const double> p_hat,
                                 double threshold = 0.5);

/// (1/n) sum_i y_i / rho_i * 1{t_i = policy_i}, rho_i the probability of the
/// realized arm. Throws LengthMismatch.
double policy_value(std::span<const double> y, std::span<const int> t,
                    std::span<const int> policy, std::span<const double> p_hat);

/// Regression from covariates to optimized log-degrees, used to carry a
/// per-unit solution over to units outside the optimization sample.
struct LambdaMap {
  Standardizer standardizer;
  StumpBooster booster;

  std::vector<double> predict(const Eigen::MatrixXd& x) const;
};

LambdaMap fit_lambda_map(const Eigen::MatrixXd& x, std::span<const double> lambda,
                         int rounds = 100, double learning_rate = 0.1);

}  // namespace sie
