#pragma once

#include "sie/cross_fit.hpp"
#include "sie/dataset.hpp"
#include "sie/exec.hpp"
#include "sie/influence.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sie {

struct SieOptions {
  double delta = 1.0;
  int k = 5;
  std::uint64_t seed = 0;
  NuisanceConfig nuisance;
  /// Use GroundTruth (p_true, mu0, mu1) in place of fitted nuisances.
  bool oracle_nuisance = false;
  Exec exec = Exec::parallel;
};

/// Share of p_hat on the clip bounds above which a positivity warning is raised.
inline constexpr double kPositivityWarnFraction = 0.05;

/// Fitted nuisances together with the split that produced them.
struct NuisanceFit {
  NuisanceEstimates estimates;
  FoldAssignment folds;  // empty in oracle mode
  std::vector<NuisancePair> pairs;
};

NuisanceFit fit_nuisances(const Dataset& ds, const SieOptions& options);

struct FoldDiagnostics {
  int fold = 0;
  Index n_eval = 0;
  Index n_fitted_on = 0;
  bool propensity_converged = true;
  int propensity_iterations = 0;
  double propensity_gradient_norm = 0.0;
  double clip_fraction = 0.0;
  double psi_hat = 0.0;
};

struct SieReport {
  double psi_hat = 0.0;
  double tau_sie = 0.0;
  /// mean(mu_hat(x,1) - mu_hat(x,0)), treated minus control.
  double tau_ate_plugin = 0.0;
  /// mean(p_hat mu_hat(x,1) + (1 - p_hat) mu_hat(x,0)).
  double tau_alg1 = 0.0;
  double delta = 1.0;
  int k = 0;
  std::uint64_t seed = 0;
  Index n = 0;
  double positivity_clip_fraction = 0.0;
  bool oracle_nuisance = false;
  bool within_fold = false;
  std::vector<FoldDiagnostics> per_fold;
  std::vector<std::string> warnings;
};

/// Cross-fits the nuisances, scores every unit with its out-of-fold pair
/// and averages: psi_hat = mean(phi), tau_sie = psi_hat - mean(y).
SieReport estimate_sie(const Dataset& ds, const SieOptions& options);

/// Same reduction on already fitted nuisances.
SieReport summarize_sie(const Dataset& ds, const NuisanceFit& fit, const SieOptions& options);

/// psi_hat at each delta, reusing one set of nuisances.
std::vector<double> psi_curve(const Dataset& ds, const NuisanceEstimates& est,
                              std::span<const double> deltas, Exec exec = Exec::parallel);

/// Per-unit records at a global delta.
std::vector<InfluenceRecord> influence_records(const Dataset& ds, const NuisanceEstimates& est,
                                               StochasticDegree delta);

/// |tau_hat - mean(mu1 - mu0)|. Throws NoGroundTruth.
double ate_error(double tau_hat, const Dataset& ds);

}  // namespace sie
