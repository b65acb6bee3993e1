#pragma once

#include "sie/basis.hpp"
#include "sie/dataset.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sie {

/// Depth-1 regression tree: x[feature] <= threshold ? left : right.
struct Stump {
  Index feature = 0;
  double threshold = 0.0;
  double left = 0.0;
  double right = 0.0;
};

/// Gradient boosting on squared loss with depth-1 trees.
struct StumpBooster {
  double base = 0.0;
  double learning_rate = 0.1;
  std::vector<Stump> stumps;
  std::vector<double> training_loss;  // mean squared error after each round, base first

  double predict(const Eigen::Ref<const Eigen::VectorXd>& features) const;
};

StumpBooster fit_stump_booster(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                               int rounds, double learning_rate);

/// Ridge regression with an unpenalized intercept, coef = [intercept, w...].
struct LinearRidge {
  Eigen::VectorXd coef;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& features) const;
};

LinearRidge fit_linear_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                             double ridge);

struct ConstantRegressor {
  double value = 0.0;
};

using Regressor = std::variant<LinearRidge, StumpBooster, ConstantRegressor>;

double predict(const Regressor& r, const Eigen::Ref<const Eigen::VectorXd>& features);

enum class OutcomeLearner { least_squares_linear, boosted_stumps, constant_mean };
enum class OutcomeMode { joint, per_arm };

const char* to_string(OutcomeLearner learner);
const char* to_string(OutcomeMode mode);
OutcomeLearner outcome_learner_from_string(const std::string& s);

struct OutcomeConfig {
  OutcomeLearner learner = OutcomeLearner::boosted_stumps;
  OutcomeMode mode = OutcomeMode::joint;
  int rounds = 100;
  double learning_rate = 0.1;
  double ridge = 1e-6;
};

/// mu(x, t). Joint mode holds one regressor on [standardized x, t];
/// per-arm mode holds one regressor per treatment value.
struct OutcomeModel {
  OutcomeLearner learner = OutcomeLearner::boosted_stumps;
  OutcomeMode mode = OutcomeMode::joint;
  Standardizer standardizer;
  std::vector<Regressor> regressors;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x, int t) const;
};

/// Throws EmptyArm (per-arm mode with an arm missing from idx),
/// DegenerateDesign (empty idx or a singular unregularized linear design).
OutcomeModel fit_outcome(const Dataset& ds, std::span<const Index> idx,
                         const OutcomeConfig& cfg = {});

}  // namespace sie
