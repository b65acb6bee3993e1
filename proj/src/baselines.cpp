#include "sie/baselines.hpp"

#include "sie/error.hpp"
#include "sie/estimator.hpp"
#include "sie/kernels.hpp"
#include "sie/summation.hpp"

#include <numeric>
#include <random>

namespace sie {

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::ols_plugin: return "ols";
    case BaselineKind::ipw: return "ipw";
    case BaselineKind::aipw: return "aipw";
    case BaselineKind::sma: return "sma";
    case BaselineKind::random_policy: return "random";
  }
  return "?";
}

BaselineKind baseline_kind_from_string(const std::string& s) {
  if (s == "ols" || s == "ols_plugin") return BaselineKind::ols_plugin;
  if (s == "ipw") return BaselineKind::ipw;
  if (s == "aipw") return BaselineKind::aipw;
  if (s == "sma") return BaselineKind::sma;
  if (s == "random" || s == "random_policy") return BaselineKind::random_policy;
  throw Error(ErrorCode::invalid_config, "unknown baseline '" + s + "'");
}

double ols_plugin_ate(const Dataset& ds, double ridge) {
  std::vector<Index> all(static_cast<std::size_t>(ds.n()));
  std::iota(all.begin(), all.end(), Index{0});
  OutcomeConfig cfg;
  cfg.learner = OutcomeLearner::least_squares_linear;
  cfg.mode = OutcomeMode::per_arm;
  cfg.ridge = ridge;
  const OutcomeModel model = fit_outcome(ds, all, cfg);
  std::vector<double> diff(all.size());
  for (Index i = 0; i < ds.n(); ++i) {
    const auto x = ds.x.row(i).transpose();
    diff[static_cast<std::size_t>(i)] = model.predict(x, 1) - model.predict(x, 0);
  }
  return pairwise_mean(diff);
}

double ipw_ate(std::span<const int> t, std::span<const double> y, std::span<const double> p_hat, bool normalized) {
  if (t.size() != y.size() || t.size() != p_hat.size())
    throw Error(ErrorCode::length_mismatch, "t, y and p_hat must have equal length");
  const std::size_t n = t.size();
  std::vector<double> treated(n), control(n), w1(n), w0(n);
  for (std::size_t i = 0; i < n; ++i) {
    w1[i] = t[i] == 1 ? 1.0 / p_hat[i] : 0.0;
    w0[i] = t[i] == 0 ? 1.0 / (1.0 - p_hat[i]) : 0.0;
    treated[i] = w1[i] * y[i];
    control[i] = w0[i] * y[i];
  }
  if (normalized) return pairwise_sum(treated) / pairwise_sum(w1) - pairwise_sum(control) / pairwise_sum(w0);
  return pairwise_mean(treated) - pairwise_mean(control);
}

double aipw_ate(const Dataset& ds, const NuisanceEstimates& est) {
  const PreparedUnits u = prepare_units(ds, est);
  const Eigen::VectorXd diff = u.m1 - u.m0;
  return pairwise_mean(std::span<const double>(diff.data(), diff.size()));
}

double estimate_ate_baseline(BaselineKind kind, const Dataset& ds, const BaselineOptions& options) {
  switch (kind) {
    case BaselineKind::ols_plugin:
      return ols_plugin_ate(ds, options.ols_ridge);
    case BaselineKind::ipw: {
      const FoldAssignment folds = kfold_split(ds, options.k, options.seed);
      Eigen::VectorXd p(ds.n());
      for (int j = 0; j < folds.k; ++j) {
        PropensityConfig pcfg = options.nuisance.propensity;
        pcfg.seed = options.seed + static_cast<std::uint64_t>(j);
        const auto train = options.nuisance.within_fold ? folds.members(j) : folds.complement(j);
        const PropensityModel model = fit_propensity(ds, train, pcfg);
        for (Index i : folds.members(j)) p[i] = model.predict(ds.x.row(i).transpose());
      }
      std::vector<int> t(ds.t.data(), ds.t.data() + ds.n());
      return ipw_ate(t, std::span<const double>(ds.y.data(), ds.y.size()),
                     std::span<const double>(p.data(), p.size()), options.ipw_normalized);
    }
    case BaselineKind::aipw: {
      SieOptions so;
      so.k = options.k;
      so.seed = options.seed;
      so.nuisance = options.nuisance;
      so.exec = options.exec;
      return aipw_ate(ds, fit_nuisances(ds, so).estimates);
    }
    case BaselineKind::sma:
    case BaselineKind::random_policy:
      throw Error(ErrorCode::invalid_config, std::string(to_string(kind)) + " is a policy baseline, not an ATE estimator");
  }
  throw Error(ErrorCode::invalid_config, "unhandled baseline");
}

std::vector<int> SmaModel::policy(const Eigen::MatrixXd& x) const {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i).transpose();
    out[static_cast<std::size_t>(i)] = model.predict(row, 1) > model.predict(row, 0) ? 1 : 0;
  }
  return out;
}

SmaModel fit_sma(const Dataset& ds, std::span<const Index> idx, OutcomeLearner learner) {
  OutcomeConfig cfg;
  cfg.learner = learner;
  cfg.mode = OutcomeMode::per_arm;
  return SmaModel{fit_outcome(ds, idx, cfg)};
}

std::vector<int> sma_policy(const Dataset& ds, OutcomeLearner learner, std::uint64_t /*seed*/) {
  std::vector<Index> all(static_cast<std::size_t>(ds.n()));
  std::iota(all.begin(), all.end(), Index{0});
  return fit_sma(ds, all, learner).policy(ds.x);
}

std::vector<int> random_policy(Index n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::invalid_config, "random policy probability must lie in [0,1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (auto& a : out) a = uniform(rng) < p ? 1 : 0;
  return out;
}

}  // namespace sie
