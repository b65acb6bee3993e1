#include "sie/estimator.hpp"

#include "sie/error.hpp"
#include "sie/kernels.hpp"
#include "sie/summation.hpp"

#include <cmath>
#include <cstdio>

namespace sie {

namespace {

double mean_of(const Eigen::VectorXd& v) { return pairwise_mean(std::span<const double>(v.data(), v.size())); }

}  // namespace

NuisanceFit fit_nuisances(const Dataset& ds, const SieOptions& options) {
  NuisanceFit fit;
  if (options.oracle_nuisance) {
    fit.estimates = oracle_estimates(ds);
    return fit;
  }
  fit.folds = kfold_split(ds, options.k, options.seed);
  NuisanceConfig cfg = options.nuisance;
  cfg.propensity.seed = options.seed;
  fit.pairs = cross_fit(ds, fit.folds, cfg, options.exec);
  fit.estimates = out_of_fold_estimates(ds, fit.folds, fit.pairs, options.exec);
  return fit;
}

SieReport summarize_sie(const Dataset& ds, const NuisanceFit& fit, const SieOptions& options) {
  const StochasticDegree degree = StochasticDegree::from_delta(options.delta);
  const NuisanceEstimates& est = fit.estimates;
  const PreparedUnits units = prepare_units(ds, est);
  const Index n = ds.n();

  std::vector<double> phi(static_cast<std::size_t>(n));
  kernels::phi_global(units, degree.log_delta(), phi, options.exec);

  SieReport r;
  r.psi_hat = pairwise_mean(phi);
  r.tau_sie = r.psi_hat - mean_of(ds.y);
  r.tau_ate_plugin = mean_of(est.mu1_hat - est.mu0_hat);
  const Eigen::VectorXd alg1 =
      est.p_hat.cwiseProduct(est.mu1_hat) + (1.0 - est.p_hat.array()).matrix().cwiseProduct(est.mu0_hat);
  r.tau_alg1 = mean_of(alg1);
  r.delta = options.delta;
  r.k = options.oracle_nuisance ? 0 : fit.folds.k;
  r.seed = options.seed;
  r.n = n;
  r.positivity_clip_fraction = est.clip_fraction();
  r.oracle_nuisance = options.oracle_nuisance;
  r.within_fold = options.nuisance.within_fold;

  for (const auto& pair : fit.pairs) {
    FoldDiagnostics diag;
    diag.fold = pair.fold;
    diag.n_fitted_on = static_cast<Index>(pair.fitted_on.size());
    diag.propensity_converged = pair.propensity.converged;
    diag.propensity_iterations = pair.propensity.iterations;
    diag.propensity_gradient_norm = pair.propensity.gradient_norm;
    std::vector<double> fold_phi;
    Index clipped = 0;
    for (Index i = 0; i < n; ++i) {
      if (fit.folds.fold_of[static_cast<std::size_t>(i)] != pair.fold) continue;
      fold_phi.push_back(phi[static_cast<std::size_t>(i)]);
      if (est.p_hat[i] <= est.clip_lo || est.p_hat[i] >= est.clip_hi) ++clipped;
    }
    diag.n_eval = static_cast<Index>(fold_phi.size());
    diag.psi_hat = pairwise_mean(fold_phi);
    diag.clip_fraction = fold_phi.empty() ? 0.0 : static_cast<double>(clipped) / static_cast<double>(fold_phi.size());
    if (!diag.propensity_converged) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "NonConvergence: fold %d propensity stopped after %d iterations (gradient norm %.3g)",
                    diag.fold, diag.propensity_iterations, diag.propensity_gradient_norm);
      r.warnings.emplace_back(buf);
    }
    r.per_fold.push_back(diag);
  }
  if (r.positivity_clip_fraction > kPositivityWarnFraction) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "PositivityWarning: %.1f%% of propensities sit on the clip bounds",
                  100.0 * r.positivity_clip_fraction);
    r.warnings.emplace_back(buf);
  }
  return r;
}

SieReport estimate_sie(const Dataset& ds, const SieOptions& options) {
  StochasticDegree::from_delta(options.delta);
  return summarize_sie(ds, fit_nuisances(ds, options), options);
}

std::vector<double> psi_curve(const Dataset& ds, const NuisanceEstimates& est, std::span<const double> deltas,
                              Exec exec) {
  const PreparedUnits units = prepare_units(ds, est);
  std::vector<double> phi(static_cast<std::size_t>(ds.n()));
  std::vector<double> out;
  out.reserve(deltas.size());
  for (double delta : deltas) {
    kernels::phi_global(units, StochasticDegree::from_delta(delta).log_delta(), phi, exec);
    out.push_back(pairwise_mean(phi));
  }
  return out;
}

std::vector<InfluenceRecord> influence_records(const Dataset& ds, const NuisanceEstimates& est,
                                               StochasticDegree delta) {
  if (est.n() != ds.n()) throw Error(ErrorCode::length_mismatch, "nuisance estimates do not match the dataset");
  std::vector<InfluenceRecord> out;
  out.reserve(static_cast<std::size_t>(ds.n()));
  for (Index i = 0; i < ds.n(); ++i)
    out.push_back(influence(i, ds.t[i], ds.y[i], est.p_hat[i], est.mu0_hat[i], est.mu1_hat[i], delta));
  return out;
}

double ate_error(double tau_hat, const Dataset& ds) {
  if (!ds.has_truth()) throw Error(ErrorCode::no_ground_truth, "ATE error needs mu0 and mu1");
  return std::abs(tau_hat - ds.truth->ate());
}

}  // namespace sie
