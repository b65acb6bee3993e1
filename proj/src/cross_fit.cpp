#include "sie/cross_fit.hpp"

#include "sie/error.hpp"

#include <exception>

namespace sie {

std::vector<NuisancePair> cross_fit(const Dataset& ds, const FoldAssignment& folds, const NuisanceConfig& cfg,
                                    Exec exec) {
  if (folds.k < 2 || static_cast<Index>(folds.fold_of.size()) != ds.n())
    throw Error(ErrorCode::invalid_config, "fold assignment does not match the dataset");
  const int k = folds.k;
  std::vector<NuisancePair> pairs(static_cast<std::size_t>(k));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(k));

  auto fit_fold = [&](int j) {
    try {
      NuisancePair& pair = pairs[static_cast<std::size_t>(j)];
      pair.fold = j;
      pair.fitted_on = cfg.within_fold ? folds.members(j) : folds.complement(j);
      PropensityConfig pcfg = cfg.propensity;
      pcfg.seed = cfg.propensity.seed + static_cast<std::uint64_t>(j);
      pair.propensity = fit_propensity(ds, pair.fitted_on, pcfg);
      pair.outcome = fit_outcome(ds, pair.fitted_on, cfg.outcome);
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(j)] =
          std::make_exception_ptr(Error(e.code(), "fold " + std::to_string(j) + ": " + e.detail()));
    } catch (...) {
      failures[static_cast<std::size_t>(j)] = std::current_exception();
    }
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < k; ++j) fit_fold(j);
  } else {
    for (int j = 0; j < k; ++j) fit_fold(j);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return pairs;
}

double NuisanceEstimates::clip_fraction() const {
  if (p_hat.size() == 0) return 0.0;
  Index hits = 0;
  for (Index i = 0; i < p_hat.size(); ++i)
    if (p_hat[i] <= clip_lo || p_hat[i] >= clip_hi) ++hits;
  return static_cast<double>(hits) / static_cast<double>(p_hat.size());
}

NuisanceEstimates out_of_fold_estimates(const Dataset& ds, const FoldAssignment& folds,
                                        const std::vector<NuisancePair>& pairs, Exec exec) {
  if (static_cast<int>(pairs.size()) != folds.k)
    throw Error(ErrorCode::invalid_config, "one nuisance pair per fold expected");
  const Index n = ds.n();
  NuisanceEstimates est;
  est.p_hat.resize(n);
  est.mu0_hat.resize(n);
  est.mu1_hat.resize(n);
  est.clip_lo = pairs.front().propensity.clip_lo;
  est.clip_hi = pairs.front().propensity.clip_hi;

  auto eval = [&](Index i) {
    const NuisancePair& pair = pairs[static_cast<std::size_t>(folds.fold_of[static_cast<std::size_t>(i)])];
    const auto x = ds.x.row(i).transpose();
    est.p_hat[i] = pair.propensity.predict(x);
    est.mu0_hat[i] = pair.outcome.predict(x, 0);
    est.mu1_hat[i] = pair.outcome.predict(x, 1);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) eval(i);
  } else {
    for (Index i = 0; i < n; ++i) eval(i);
  }
  return est;
}

NuisanceEstimates oracle_estimates(const Dataset& ds) {
  if (!ds.has_truth() || !ds.truth->has_propensity())
    throw Error(ErrorCode::no_ground_truth, "oracle nuisances need mu0, mu1 and p_true columns");
  NuisanceEstimates est;
  est.p_hat = ds.truth->p_true;
  est.mu0_hat = ds.truth->mu0;
  est.mu1_hat = ds.truth->mu1;
  est.clip_lo = 0.0;
  est.clip_hi = 1.0;
  return est;
}

NuisanceEstimates estimates_from_pair(const Dataset& ds, const NuisancePair& pair) {
  const Index n = ds.n();
  NuisanceEstimates est;
  est.p_hat.resize(n);
  est.mu0_hat.resize(n);
  est.mu1_hat.resize(n);
  est.clip_lo = pair.propensity.clip_lo;
  est.clip_hi = pair.propensity.clip_hi;
  for (Index i = 0; i < n; ++i) {
    const auto x = ds.x.row(i).transpose();
    est.p_hat[i] = pair.propensity.predict(x);
    est.mu0_hat[i] = pair.outcome.predict(x, 0);
    est.mu1_hat[i] = pair.outcome.predict(x, 1);
  }
  return est;
}

}  // namespace sie
