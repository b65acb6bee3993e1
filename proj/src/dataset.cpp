#include "sie/dataset.hpp"

#include "sie/error.hpp"
#include "sie/summation.hpp"

#include <cmath>
#include <span>

namespace sie {

double GroundTruth::ate() const {
  const Eigen::VectorXd diff = mu1 - mu0;
  return pairwise_mean(std::span<const double>(diff.data(), diff.size()));
}

std::vector<std::string> default_covariate_names(Index d) {
  std::vector<std::string> names;
  names.reserve(d);
  for (Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

namespace {

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

}  // namespace

Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXi t, Eigen::VectorXd y,
                     std::vector<std::string> covariate_names, std::optional<GroundTruth> truth) {
  const Index n = y.size();
  if (n < 2) throw Error(ErrorCode::too_few_units, "dataset needs n >= 2, got " + std::to_string(n));
  if (x.rows() != n || t.size() != n)
    throw Error(ErrorCode::invalid_dataset, "x, t and y must share n");
  if (x.cols() < 1) throw Error(ErrorCode::invalid_dataset, "dataset needs d >= 1");
  for (Index i = 0; i < n; ++i) {
    if (t[i] != 0 && t[i] != 1)
      throw Error(ErrorCode::non_binary_treatment, "unit " + std::to_string(i) + " has t=" + std::to_string(t[i]));
  }
  if (!all_finite(x) || !all_finite(y))
    throw Error(ErrorCode::non_finite_value, "covariates and outcome must be finite");
  if (covariate_names.empty()) covariate_names = default_covariate_names(x.cols());
  if (static_cast<Index>(covariate_names.size()) != x.cols())
    throw Error(ErrorCode::invalid_dataset, "covariate name count does not match d");
  if (truth) {
    if (truth->mu0.size() != n || truth->mu1.size() != n ||
        (truth->p_true.size() != 0 && truth->p_true.size() != n))
      throw Error(ErrorCode::invalid_dataset, "ground truth lengths must match n");
    if (!all_finite(truth->mu0) || !all_finite(truth->mu1))
      throw Error(ErrorCode::non_finite_value, "ground truth must be finite");
    for (Index i = 0; i < truth->p_true.size(); ++i) {
      const double p = truth->p_true[i];
      if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorCode::invalid_dataset, "p_true must lie strictly in (0,1) at unit " + std::to_string(i));
    }
  }
  Dataset ds;
  ds.x = std::move(x);
  ds.t = std::move(t);
  ds.y = std::move(y);
  ds.covariate_names = std::move(covariate_names);
  ds.truth = std::move(truth);
  return ds;
}

Dataset Dataset::subset(std::span<const Index> idx) const {
  const auto m = static_cast<Index>(idx.size());
  Dataset out;
  out.x.resize(m, d());
  out.t.resize(m);
  out.y.resize(m);
  for (Index r = 0; r < m; ++r) {
    out.x.row(r) = x.row(idx[r]);
    out.t[r] = t[idx[r]];
    out.y[r] = y[idx[r]];
  }
  out.covariate_names = covariate_names;
  if (truth) {
    GroundTruth g;
    g.mu0.resize(m);
    g.mu1.resize(m);
    g.p_true.resize(truth->has_propensity() ? m : 0);
    for (Index r = 0; r < m; ++r) {
      g.mu0[r] = truth->mu0[idx[r]];
      g.mu1[r] = truth->mu1[idx[r]];
      if (truth->has_propensity()) g.p_true[r] = truth->p_true[idx[r]];
    }
    out.truth = std::move(g);
  }
  return out;
}

Dataset Dataset::without_truth() const {
  Dataset out = *this;
  out.truth.reset();
  return out;
}

}  // namespace sie
