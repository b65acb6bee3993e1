#pragma once

#include "sie/cross_fit.hpp"
#include "sie/dataset.hpp"
#include "sie/exec.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sie {

enum class BaselineKind { ols_plugin, ipw, aipw, sma, random_policy };

const char* to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(const std::string& s);

struct BaselineOptions {
  int k = 5;
  std::uint64_t seed = 0;
  NuisanceConfig nuisance;
  /// Self-normalized (Hajek) weights for IPW.
  bool ipw_normalized = false;
  double ols_ridge = 1e-6;
  Exec exec = Exec::parallel;
};

/// ATE (treated minus control) for ols_plugin, ipw or aipw. Propensities
/// and outcome models are cross-fitted with the options' folds.
/// Throws InvalidConfig for the policy baselines.
double estimate_ate_baseline(BaselineKind kind, const Dataset& ds, const BaselineOptions& options);

/// mean(f1(x) - f0(x)) from per-arm ridge regressions on all units.
double ols_plugin_ate(const Dataset& ds, double ridge = 1e-6);

/// mean(t y / p) - mean((1-t) y / (1-p)); the normalized form divides each
/// arm by its weight total instead of n.
double ipw_ate(std::span<const int> t, std::span<const double> y, std::span<const double> p_hat,
               bool normalized = false);

/// mean(m1 - m0) with the m-values of the given nuisances.
double aipw_ate(const Dataset& ds, const NuisanceEstimates& est);

/// Separate model approach: one outcome regressor per arm.
struct SmaModel {
  OutcomeModel model;

  /// 1 where f1(x) > f0(x); ties go to control.
  std::vector<int> policy(const Eigen::MatrixXd& x) const;
};

SmaModel fit_sma(const Dataset& ds, std::span<const Index> idx, OutcomeLearner learner);

/// Policy for the units of ds from models fitted on all of ds.
/// Throws EmptyArm.
std::vector<int> sma_policy(const Dataset& ds, OutcomeLearner learner, std::uint64_t seed = 0);

/// iid Bernoulli(p) assignments.
std::vector<int> random_policy(Index n, double p, std::uint64_t seed);

}  // namespace sie
