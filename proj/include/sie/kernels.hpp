#pragma once

#include "sie/cross_fit.hpp"
#include "sie/dataset.hpp"

#include <span>

namespace sie {

/// Everything the influence reward needs per unit, precomputed once:
/// p_hat and the m-values do not depend on the intervention degree.
struct PreparedUnits {
  Eigen::VectorXd p_hat;
  Eigen::VectorXd m0;
  Eigen::VectorXd m1;
  Eigen::VectorXd y;

  Index n() const { return p_hat.size(); }
};

PreparedUnits prepare_units(const Dataset& ds, const NuisanceEstimates& est);

/// How a search parameter maps to the per-unit degree.
enum class ParamMap {
  log_delta,    // lambda_i, delta_i = exp(lambda_i)
  raw_clamped,  // delta_i = clamp(param_i, 1e-3, 1e3)
};

inline constexpr double kRawDeltaMin = 1e-3;
inline constexpr double kRawDeltaMax = 1e3;

double param_to_log_delta(double param, ParamMap map);

namespace kernels {

// Every kernel has a serial reference and an OpenMP variant. Variants write
// per-unit values into slots and reduce serially with pairwise_sum, so both
// return bit-identical results for any thread count.

/// phi_i for one global log-degree.
void phi_global(const PreparedUnits& u, double log_delta, std::span<double> phi, Exec exec);

/// phi_i with per-unit parameters.
void phi_per_unit(const PreparedUnits& u, std::span<const double> params, ParamMap map,
                  std::span<double> phi, Exec exec);

/// Sum of phi_i with per-unit parameters.
double reward(const PreparedUnits& u, std::span<const double> params, ParamMap map, Exec exec);

/// For each row k of `directions` (m x n): plus[k] = reward(base + nu d_k),
/// minus[k] = reward(base - nu d_k). The parallel variant splits over
/// directions.
void direction_rewards(const PreparedUnits& u, std::span<const double> base,
                       const Eigen::MatrixXd& directions, double nu, ParamMap map,
                       std::span<double> plus, std::span<double> minus, Exec exec);

}  // namespace kernels
}  // namespace sie
