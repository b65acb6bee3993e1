#include "sie/influence.hpp"

#include "sie/error.hpp"
#include "sie/propensity.hpp"

#include <cmath>

namespace sie {

StochasticDegree StochasticDegree::from_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw Error(ErrorCode::domain_error, "stochastic degree must be finite and > 0, got " + std::to_string(delta));
  return StochasticDegree(std::log(delta));
}

StochasticDegree StochasticDegree::from_log(double lambda) {
  if (!std::isfinite(lambda)) throw Error(ErrorCode::domain_error, "log-degree must be finite");
  return StochasticDegree(lambda);
}

double StochasticDegree::delta() const { return std::exp(lambda_); }

double shifted_propensity(double p_hat, double log_delta) {
  if (log_delta == 0.0) return p_hat;
  return sigmoid(std::log(p_hat) - std::log1p(-p_hat) + log_delta);
}

double stochastic_propensity(double p_hat, StochasticDegree delta) {
  if (!(p_hat > 0.0 && p_hat < 1.0))
    throw Error(ErrorCode::domain_error, "propensity must lie in (0,1), got " + std::to_string(p_hat));
  return shifted_propensity(p_hat, delta.log_delta());
}

MValues m_values(int t, double y, double p_hat, double mu0_hat, double mu1_hat) {
  MValues m;
  m.m1 = (t == 1 ? (y - mu1_hat) / p_hat : 0.0) + mu1_hat;
  m.m0 = (t == 0 ? (y - mu0_hat) / (1.0 - p_hat) : 0.0) + mu0_hat;
  return m;
}

MValues m_values(const Eigen::Ref<const Eigen::VectorXd>& x, int t, double y, double p_hat,
                 const OutcomeModel& mu_hat) {
  return m_values(t, y, p_hat, mu_hat.predict(x, 0), mu_hat.predict(x, 1));
}

InfluenceRecord influence(Index unit, int t, double y, double p_hat, double mu0_hat, double mu1_hat,
                          StochasticDegree delta) {
  const double q = stochastic_propensity(p_hat, delta);
  const MValues m = m_values(t, y, p_hat, mu0_hat, mu1_hat);
  return {unit, q, m.m0, m.m1, q * m.m1 + (1.0 - q) * m.m0};
}

}  // namespace sie
