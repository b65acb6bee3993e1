#include "sie/synthetic.hpp"

#include "sie/error.hpp"
#include "sie/propensity.hpp"

#include <cmath>
#include <random>

namespace sie {

namespace {

double default_log_odds(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return 0.4 * x[0] - 0.3 * x[1] + 0.2 * x[0] * x[1];
}

double default_mu0(const Eigen::Ref<const Eigen::VectorXd>& x) { return x[0] + 0.5 * x[1] * x[1]; }

}  // namespace

DgpSpec default_dgp(double sigma, double confounding) {
  DgpSpec s;
  s.name = "default";
  s.d = 6;
  s.sigma = sigma;
  s.propensity = [confounding](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return sigmoid(confounding * default_log_odds(x));
  };
  s.mu0 = default_mu0;
  s.mu1 = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return default_mu0(x) + 1.0 + 0.5 * x[2]; };
  return s;
}

DgpSpec linear_dgp(double effect, double sigma, Index d) {
  DgpSpec s;
  s.name = "linear";
  s.d = d;
  s.sigma = sigma;
  // beta_j = 1 / j keeps the outcome scale O(1) for any d.
  Eigen::VectorXd beta(d);
  for (Index j = 0; j < d; ++j) beta[j] = 1.0 / static_cast<double>(j + 1);
  s.propensity = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return sigmoid(x.size() >= 2 ? default_log_odds(x) : 0.4 * x[0]);
  };
  s.mu0 = [beta](const Eigen::Ref<const Eigen::VectorXd>& x) { return x.dot(beta); };
  s.mu1 = [beta, effect](const Eigen::Ref<const Eigen::VectorXd>& x) { return x.dot(beta) + effect; };
  return s;
}

DgpSpec randomized_dgp(double effect, double sigma, Index d) {
  DgpSpec s = linear_dgp(effect, sigma, d);
  s.name = "randomized";
  s.propensity = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.5; };
  return s;
}

DgpSpec sign_x3_dgp(double sigma) {
  DgpSpec s = default_dgp(sigma);
  s.name = "sign_x3";
  s.mu1 = [](const Eigen::Ref<const Eigen::VectorXd>& x) { return default_mu0(x) + x[2]; };
  return s;
}

DgpSpec dgp_by_name(const std::string& name, double sigma, double confounding) {
  if (name == "default") return default_dgp(sigma, confounding);
  if (name == "linear") return linear_dgp(2.0, sigma);
  if (name == "randomized") return randomized_dgp(2.0, sigma);
  if (name == "sign_x3") return sign_x3_dgp(sigma);
  throw Error(ErrorCode::invalid_spec, "unknown DGP '" + name + "'");
}

Dataset make_synthetic(const DgpSpec& spec, Index n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::too_few_units, "synthetic data needs n >= 2, got " + std::to_string(n));
  if (spec.d < 1) throw Error(ErrorCode::invalid_spec, "d must be >= 1");
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma))
    throw Error(ErrorCode::invalid_spec, "sigma must be finite and >= 0");
  if (!spec.propensity || !spec.mu0 || !spec.mu1)
    throw Error(ErrorCode::invalid_spec, "propensity and outcome surfaces must be set");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Eigen::MatrixXd x(n, spec.d);
  Eigen::VectorXi t(n);
  Eigen::VectorXd y(n);
  GroundTruth g;
  g.mu0.resize(n);
  g.mu1.resize(n);
  g.p_true.resize(n);
  Eigen::VectorXd row(spec.d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < spec.d; ++j) row[j] = normal(rng);
    x.row(i) = row.transpose();
    const double p = spec.propensity(row);
    if (!(p > 0.0 && p < 1.0))
      throw Error(ErrorCode::invalid_spec,
                  "propensity reached " + std::to_string(p) + " at unit " + std::to_string(i));
    g.p_true[i] = p;
    g.mu0[i] = spec.mu0(row);
    g.mu1[i] = spec.mu1(row);
    t[i] = uniform(rng) < p ? 1 : 0;
    y[i] = (t[i] == 1 ? g.mu1[i] : g.mu0[i]) + spec.sigma * normal(rng);
  }
  return make_dataset(std::move(x), std::move(t), std::move(y), default_covariate_names(spec.d), std::move(g));
}

}  // namespace sie
