#pragma once

#include "sie/exec.hpp"
#include "sie/folds.hpp"
#include "sie/outcome.hpp"
#include "sie/propensity.hpp"

#include <vector>

namespace sie {

struct NuisanceConfig {
  PropensityConfig propensity;
  OutcomeConfig outcome;
  /// Fit on the evaluation fold itself instead of its complement.
  bool within_fold = false;

  /// Intercept-only logistic propensity.
  void misspecify_propensity() { propensity.basis = BasisKind::intercept_only; }
  /// Outcome model predicting the global training mean.
  void misspecify_outcome() { outcome.learner = OutcomeLearner::constant_mean; }
};

struct NuisancePair {
  int fold = 0;
  PropensityModel propensity;
  OutcomeModel outcome;
  std::vector<Index> fitted_on;
};

/// One pair per fold; pair j is fitted on the complement of fold j (or on
/// fold j in within-fold mode). Fit errors are rethrown with the fold index.
std::vector<NuisancePair> cross_fit(const Dataset& ds, const FoldAssignment& folds,
                                    const NuisanceConfig& cfg, Exec exec = Exec::parallel);

/// Per-unit nuisance values used by every estimator: p_hat (clipped), and
/// mu_hat(x, 0), mu_hat(x, 1).
struct NuisanceEstimates {
  Eigen::VectorXd p_hat;
  Eigen::VectorXd mu0_hat;
  Eigen::VectorXd mu1_hat;
  double clip_lo = 0.0;
  double clip_hi = 1.0;

  Index n() const { return p_hat.size(); }
  /// Fraction of units whose p_hat sits on a clip bound.
  double clip_fraction() const;
};

/// Evaluates each unit with the pair of its own fold.
NuisanceEstimates out_of_fold_estimates(const Dataset& ds, const FoldAssignment& folds,
                                        const std::vector<NuisancePair>& pairs,
                                        Exec exec = Exec::parallel);

/// Substitutes the ground truth (mu0, mu1, p_true, unclipped). Throws
/// NoGroundTruth.
NuisanceEstimates oracle_estimates(const Dataset& ds);

/// Evaluates a single fitted pair on every row of ds.
NuisanceEstimates estimates_from_pair(const Dataset& ds, const NuisancePair& pair);

}  // namespace sie
