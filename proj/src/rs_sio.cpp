#include "sie/rs_sio.hpp"

#include "sie/error.hpp"
#include "sie/influence.hpp"
#include "sie/summation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sie {

void RsConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::invalid_config, "alpha must be > 0");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw Error(ErrorCode::invalid_config, "nu must be > 0");
  if (steps < 0) throw Error(ErrorCode::invalid_config, "steps must be >= 0");
  if (directions < 1) throw Error(ErrorCode::invalid_config, "directions must be >= 1");
  if (top < 1 || top > directions)
    throw Error(ErrorCode::invalid_config, "top directions must satisfy 1 <= b <= m (b=" + std::to_string(top) +
                                               ", m=" + std::to_string(directions) + ")");
}

std::vector<double> OptimizeResult::log_deltas() const {
  std::vector<double> out(params.size());
  std::transform(params.begin(), params.end(), out.begin(), [&](double p) { return param_to_log_delta(p, map); });
  return out;
}

double reward(const PreparedUnits& units, std::span<const double> lambda, Exec exec) {
  return kernels::reward(units, lambda, ParamMap::log_delta, exec);
}

OptimizeResult optimize(const PreparedUnits& units, const RsConfig& cfg) {
  cfg.validate();
  const Index n = units.n();
  const int m = cfg.directions;
  const int b = cfg.top;

  OptimizeResult result;
  result.map = cfg.raw_delta ? ParamMap::raw_clamped : ParamMap::log_delta;
  result.params.assign(static_cast<std::size_t>(n), 0.0);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd dirs(m, n);
  auto draw = [&] {
    for (int k = 0; k < m; ++k)
      for (Index i = 0; i < n; ++i) dirs(k, i) = normal(rng);
  };
  draw();

  result.initial_reward = kernels::reward(units, result.params, result.map, cfg.exec);
  std::vector<double> plus(static_cast<std::size_t>(m)), minus(static_cast<std::size_t>(m));
  std::vector<int> order(static_cast<std::size_t>(m));
  Eigen::VectorXd update(n);

  for (int step = 1; step <= cfg.steps; ++step) {
    if (cfg.resample_directions && step > 1) draw();
    kernels::direction_rewards(units, result.params, dirs, cfg.nu, result.map, plus, minus, cfg.exec);
    for (int k = 0; k < m; ++k) {
      const auto s = static_cast<std::size_t>(k);
      if (!std::isfinite(plus[s]) || !std::isfinite(minus[s]))
        throw Error(ErrorCode::non_finite_reward, "non-finite reward at step " + std::to_string(step) +
                                                      ", direction " + std::to_string(k));
    }

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
      return std::max(plus[static_cast<std::size_t>(a)], minus[static_cast<std::size_t>(a)]) >
             std::max(plus[static_cast<std::size_t>(c)], minus[static_cast<std::size_t>(c)]);
    });

    double scale = cfg.alpha / static_cast<double>(b);
    if (cfg.normalize_rewards) {
      std::vector<double> selected;
      for (int r = 0; r < b; ++r) {
        selected.push_back(plus[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])]);
        selected.push_back(minus[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])]);
      }
      const double mean = pairwise_mean(selected);
      double var = 0.0;
      for (double v : selected) var += (v - mean) * (v - mean);
      const double sd = std::sqrt(var / static_cast<double>(selected.size()));
      if (sd > 0.0) scale /= sd;
    }

    update.setZero();
    for (int r = 0; r < b; ++r) {
      const auto k = static_cast<std::size_t>(order[static_cast<std::size_t>(r)]);
      update += (plus[k] - minus[k]) * dirs.row(static_cast<Index>(k)).transpose();
    }
    update *= scale;
    for (Index i = 0; i < n; ++i) result.params[static_cast<std::size_t>(i)] += update[i];

    StepRecord rec;
    rec.step = step;
    rec.reward = kernels::reward(units, result.params, result.map, cfg.exec);
    rec.best_reward = std::max(plus[static_cast<std::size_t>(order[0])], minus[static_cast<std::size_t>(order[0])]);
    std::vector<double> all(plus);
    all.insert(all.end(), minus.begin(), minus.end());
    rec.mean_reward = pairwise_mean(all);
    rec.update_norm = update.norm();
    if (!std::isfinite(rec.reward))
      throw Error(ErrorCode::non_finite_reward, "non-finite reward after update at step " + std::to_string(step));
    result.trajectory.push_back(rec);
  }
  result.final_reward = result.trajectory.empty() ? result.initial_reward : result.trajectory.back().reward;
  return result;
}

std::vector<int> delta_to_policy(std::span<const double> lambda, std::span<const double> p_hat, double threshold) {
  if (lambda.size() != p_hat.size()) throw Error(ErrorCode::length_mismatch, "lambda and p_hat must have equal length");
  std::vector<int> out(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) out[i] = shifted_propensity(p_hat[i], lambda[i]) >= threshold ? 1 : 0;
  return out;
}

double policy_value(std::span<const double> y, std::span<const int> t, std::span<const int> policy,
                    std::span<const double> p_hat) {
  if (y.size() != t.size() || y.size() != policy.size() || y.size() != p_hat.size())
    throw Error(ErrorCode::length_mismatch, "y, t, policy and p_hat must have equal length");
  std::vector<double> terms(y.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (t[i] != policy[i]) continue;
    const double rho = t[i] == 1 ? p_hat[i] : 1.0 - p_hat[i];
    terms[i] = y[i] / rho;
  }
  return pairwise_mean(terms);
}

std::vector<double> LambdaMap::predict(const Eigen::MatrixXd& x) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = booster.predict(standardizer.apply(x.row(i).transpose()));
  return out;
}

LambdaMap fit_lambda_map(const Eigen::MatrixXd& x, std::span<const double> lambda, int rounds, double learning_rate) {
  if (static_cast<Index>(lambda.size()) != x.rows())
    throw Error(ErrorCode::length_mismatch, "one lambda per covariate row expected");
  std::vector<Index> all(lambda.size());
  std::iota(all.begin(), all.end(), Index{0});
  LambdaMap map;
  map.standardizer = Standardizer::fit(x, all);
  const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(lambda.data(), static_cast<Index>(lambda.size()));
  map.booster = fit_stump_booster(map.standardizer.apply_rows(x), target, rounds, learning_rate);
  return map;
}

}  // namespace sie
