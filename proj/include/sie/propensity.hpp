#pragma once

#include "sie/basis.hpp"
#include "sie/dataset.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sie {

struct PropensityConfig {
  BasisKind basis = BasisKind::polynomial2;
  double ridge = 1e-3;
  bool penalize_intercept = false;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double clip_lo = 0.01;
  double clip_hi = 0.99;
  std::uint64_t seed = 0;
};

/// Basis-expanded logistic model p(x) = sigmoid(beta . g(x)), clipped.
struct PropensityModel {
  Standardizer standardizer;
  BasisExpansion basis;
  Eigen::VectorXd beta;
  double clip_lo = 0.01;
  double clip_hi = 0.99;

  // Fit diagnostics.
  bool converged = true;
  double gradient_norm = 0.0;
  int iterations = 0;
  std::vector<double> loss_history;

  double log_odds(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& x) const;
};

/// Ridge-penalized logistic regression on the expanded features of the rows
/// in idx, solved by damped Newton (IRLS) with backtracking so the objective
/// never increases:
///   mean_i NLL(t_i | beta . g(x_i)) + ridge/2 * |beta_{1..s-1}|^2.
/// Throws SingleClass when idx holds one treatment arm only. Hitting the
/// iteration cap returns the model with converged = false.
PropensityModel fit_propensity(const Dataset& ds, std::span<const Index> idx,
                               const PropensityConfig& cfg = {});

/// Numerically stable logistic function.
double sigmoid(double z);

}  // namespace sie
