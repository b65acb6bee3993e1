#include "sie/propensity.hpp"

#include "sie/error.hpp"

#include <algorithm>
#include <cmath>

namespace sie {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

struct LogisticObjective {
  const Eigen::MatrixXd& g;
  const Eigen::VectorXd& t;
  Eigen::VectorXd penalty;  // ridge weight per coefficient

  double value(const Eigen::VectorXd& beta) const {
    const Eigen::VectorXd eta = g * beta;
    double nll = 0.0;
    for (Index i = 0; i < eta.size(); ++i) nll += softplus(eta[i]) - t[i] * eta[i];
    return nll / static_cast<double>(eta.size()) + 0.5 * beta.cwiseProduct(penalty).dot(beta);
  }
};

}  // namespace

double PropensityModel::log_odds(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return basis.expand(standardizer.apply(x)).dot(beta);
}

double PropensityModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return std::clamp(sigmoid(log_odds(x)), clip_lo, clip_hi);
}

Eigen::VectorXd PropensityModel::predict_rows(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd p(x.rows());
  for (Index i = 0; i < x.rows(); ++i) p[i] = predict(x.row(i).transpose());
  return p;
}

PropensityModel fit_propensity(const Dataset& ds, std::span<const Index> idx, const PropensityConfig& cfg) {
  if (!(cfg.clip_lo > 0.0 && cfg.clip_lo < cfg.clip_hi && cfg.clip_hi < 1.0))
    throw Error(ErrorCode::invalid_config, "propensity clip range must satisfy 0 < lo < hi < 1");
  if (!(cfg.ridge >= 0.0)) throw Error(ErrorCode::invalid_config, "ridge strength must be >= 0");
  Index treated = 0;
  for (Index i : idx) treated += ds.t[i];
  if (idx.empty() || treated == 0 || treated == static_cast<Index>(idx.size()))
    throw Error(ErrorCode::single_class, "propensity fit needs both treatment arms among " +
                                             std::to_string(idx.size()) + " units");

  PropensityModel model;
  model.clip_lo = cfg.clip_lo;
  model.clip_hi = cfg.clip_hi;
  model.standardizer = Standardizer::fit(ds.x, idx);

  const auto m = static_cast<Index>(idx.size());
  Eigen::MatrixXd xs(m, ds.d());
  Eigen::VectorXd t(m);
  for (Index r = 0; r < m; ++r) {
    xs.row(r) = ds.x.row(idx[r]);
    t[r] = ds.t[idx[r]];
  }
  xs = model.standardizer.apply_rows(xs);
  model.basis = make_basis(cfg.basis, xs, cfg.seed);
  const Eigen::MatrixXd g = model.basis.expand_rows(xs);
  const Index s = g.cols();

  LogisticObjective obj{g, t, Eigen::VectorXd::Constant(s, cfg.ridge)};
  if (!cfg.penalize_intercept) obj.penalty[0] = 0.0;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(s);
  const double rate = static_cast<double>(treated) / static_cast<double>(m);
  if (!cfg.penalize_intercept) beta[0] = std::log(rate / (1.0 - rate));

  double loss = obj.value(beta);
  model.loss_history.push_back(loss);
  const double inv_m = 1.0 / static_cast<double>(m);
  model.converged = false;
  model.iterations = cfg.max_iterations;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const Eigen::VectorXd eta = g * beta;
    Eigen::VectorXd p(m), w(m);
    for (Index i = 0; i < m; ++i) {
      p[i] = sigmoid(eta[i]);
      w[i] = p[i] * (1.0 - p[i]);
    }
    const Eigen::VectorXd grad = g.transpose() * (p - t) * inv_m + obj.penalty.cwiseProduct(beta);
    model.gradient_norm = grad.norm();
    model.iterations = iter;
    if (model.gradient_norm < cfg.gradient_tolerance) {
      model.converged = true;
      break;
    }
    Eigen::MatrixXd hess = g.transpose() * w.asDiagonal() * g * inv_m;
    hess.diagonal() += obj.penalty;
    // A vanishing jitter keeps the factorization defined on separable or
    // collinear designs without shifting well-posed solutions.
    hess.diagonal().array() += 1e-10;
    Eigen::VectorXd step = hess.ldlt().solve(grad);
    if (!step.allFinite() || grad.dot(step) <= 0.0) step = grad;

    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      const Eigen::VectorXd trial = beta - scale * step;
      const double trial_loss = obj.value(trial);
      if (trial_loss <= loss - 1e-4 * scale * grad.dot(step)) {
        beta = trial;
        loss = trial_loss;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    model.loss_history.push_back(loss);
    if (!accepted) {
      // No decrease along a descent direction: we sit at the optimum up to
      // rounding.
      model.iterations = iter + 1;
      model.converged = model.gradient_norm < 1e-6;
      break;
    }
  }
  if (!model.converged) {
    const Eigen::VectorXd eta = g * beta;
    Eigen::VectorXd p(m);
    for (Index i = 0; i < m; ++i) p[i] = sigmoid(eta[i]);
    model.gradient_norm = (g.transpose() * (p - t) * inv_m + obj.penalty.cwiseProduct(beta)).norm();
    model.converged = model.gradient_norm < cfg.gradient_tolerance;
  }
  model.beta = std::move(beta);
  return model;
}

}  // namespace sie
