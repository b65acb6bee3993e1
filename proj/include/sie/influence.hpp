#pragma once

#include "sie/dataset.hpp"
#include "sie/outcome.hpp"

namespace sie {

/// Multiplicative odds shift delta > 0, held as lambda = ln(delta).
/// delta = 1 means no intervention.
class StochasticDegree {
 public:
  static StochasticDegree from_delta(double delta);
  static StochasticDegree from_log(double lambda);

  double delta() const;
  double log_delta() const { return lambda_; }

 private:
  explicit StochasticDegree(double lambda) : lambda_(lambda) {}
  double lambda_ = 0.0;
};

/// q = delta p / (delta p + 1 - p), evaluated as sigmoid(logit(p) + ln delta).
/// Returns p unchanged when delta == 1. Throws DomainError for p outside
/// (0,1) or delta <= 0.
double stochastic_propensity(double p_hat, StochasticDegree delta);

/// Unchecked log-odds form shared by the kernels.
double shifted_propensity(double p_hat, double log_delta);

struct MValues {
  double m0 = 0.0;
  double m1 = 0.0;
};

/// m1 = 1{t=1}(y - mu1)/p + mu1,  m0 = 1{t=0}(y - mu0)/(1 - p) + mu0.
MValues m_values(int t, double y, double p_hat, double mu0_hat, double mu1_hat);
MValues m_values(const Eigen::Ref<const Eigen::VectorXd>& x, int t, double y, double p_hat,
                 const OutcomeModel& mu_hat);

struct InfluenceRecord {
  Index unit = 0;
  double q = 0.0;
  double m0 = 0.0;
  double m1 = 0.0;
  double phi = 0.0;
};

/// phi = q m1 + (1 - q) m0.
InfluenceRecord influence(Index unit, int t, double y, double p_hat, double mu0_hat,
                          double mu1_hat, StochasticDegree delta);

}  // namespace sie
