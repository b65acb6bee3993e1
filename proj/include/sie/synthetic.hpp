#pragma once

#include "sie/dataset.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace sie {

using SurfaceFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Data-generating process with known potential outcomes. Covariates are
/// iid standard normal; t ~ Bernoulli(propensity(x));
/// y = mu_t(x) + sigma * N(0,1).
struct DgpSpec {
  std::string name;
  Index d = 6;
  double sigma = 0.5;
  SurfaceFn propensity;
  SurfaceFn mu0;
  SurfaceFn mu1;
};

/// p = sigmoid(c*(0.4 x1 - 0.3 x2 + 0.2 x1 x2)); mu0 = x1 + 0.5 x2^2;
/// mu1 = mu0 + 1 + 0.5 x3. `confounding` = c scales the log-odds.
DgpSpec default_dgp(double sigma = 0.5, double confounding = 1.0);

/// mu0 = x.beta, mu1 = mu0 + effect, with the default propensity.
DgpSpec linear_dgp(double effect = 2.0, double sigma = 0.1, Index d = 6);

/// Randomized assignment (p = 0.5) with a constant effect.
DgpSpec randomized_dgp(double effect = 2.0, double sigma = 0.5, Index d = 6);

/// Default propensity and mu0; mu1 = mu0 + x3, so treatment helps iff x3 > 0.
DgpSpec sign_x3_dgp(double sigma = 0.5);

/// Looks up one of "default", "linear", "randomized", "sign_x3".
DgpSpec dgp_by_name(const std::string& name, double sigma, double confounding);

/// Deterministic in (spec, n, seed). Throws InvalidSpec when a generated
/// propensity is not strictly inside (0,1), TooFewUnits when n < 2.
Dataset make_synthetic(const DgpSpec& spec, Index n, std::uint64_t seed);

}  // namespace sie
