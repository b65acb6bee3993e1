#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sie {

using Index = Eigen::Index;

/// True potential-outcome surfaces and treatment probabilities, per unit.
/// p_true may be empty (semi-synthetic benchmarks ship mu0/mu1 only).
struct GroundTruth {
  Eigen::VectorXd mu0;
  Eigen::VectorXd mu1;
  Eigen::VectorXd p_true;

  bool has_propensity() const { return p_true.size() > 0; }

  /// Sample ATE, treated minus control.
  double ate() const;
};

/// Observational data: covariates x (n x d), binary treatment t, outcome y.
/// Construct through make_dataset so the invariants are checked once.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXi t;
  Eigen::VectorXd y;
  std::vector<std::string> covariate_names;
  std::optional<GroundTruth> truth;

  Index n() const { return y.size(); }
  Index d() const { return x.cols(); }
  Index treated_count() const { return t.sum(); }
  bool has_truth() const { return truth.has_value(); }

  /// Rows selected by idx, ground truth included.
  Dataset subset(std::span<const Index> idx) const;
  /// Same units, ground truth removed.
  Dataset without_truth() const;
};

/// Validates the invariants (binary t, shared n >= 2, d >= 1, finite values,
/// ground truth lengths and p_true in (0,1)) and returns the dataset.
Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXi t, Eigen::VectorXd y,
                     std::vector<std::string> covariate_names = {},
                     std::optional<GroundTruth> truth = std::nullopt);

std::vector<std::string> default_covariate_names(Index d);

}  // namespace sie
