#include "sie/kernels.hpp"

#include "sie/error.hpp"
#include "sie/influence.hpp"
#include "sie/summation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sie {

PreparedUnits prepare_units(const Dataset& ds, const NuisanceEstimates& est) {
  const Index n = ds.n();
  if (est.n() != n) throw Error(ErrorCode::length_mismatch, "nuisance estimates do not match the dataset");
  PreparedUnits u;
  u.p_hat = est.p_hat;
  u.y = ds.y;
  u.m0.resize(n);
  u.m1.resize(n);
  for (Index i = 0; i < n; ++i) {
    if (!(est.p_hat[i] > 0.0 && est.p_hat[i] < 1.0))
      throw Error(ErrorCode::domain_error, "propensity outside (0,1) at unit " + std::to_string(i));
    const MValues m = m_values(ds.t[i], ds.y[i], est.p_hat[i], est.mu0_hat[i], est.mu1_hat[i]);
    u.m0[i] = m.m0;
    u.m1[i] = m.m1;
  }
  return u;
}

double param_to_log_delta(double param, ParamMap map) {
  if (map == ParamMap::log_delta) return param;
  return std::log(std::clamp(param, kRawDeltaMin, kRawDeltaMax));
}

namespace kernels {

namespace {

inline double phi_at(const PreparedUnits& u, Index i, double log_delta) {
  const double q = shifted_propensity(u.p_hat[i], log_delta);
  return q * u.m1[i] + (1.0 - q) * u.m0[i];
}

void check_sizes(const PreparedUnits& u, std::size_t a, std::size_t b) {
  const auto n = static_cast<std::size_t>(u.n());
  if (a != n || b != n) throw Error(ErrorCode::length_mismatch, "kernel spans must have one slot per unit");
}

}  // namespace

void phi_global(const PreparedUnits& u, double log_delta, std::span<double> phi, Exec exec) {
  check_sizes(u, phi.size(), phi.size());
  const Index n = u.n();
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) phi[static_cast<std::size_t>(i)] = phi_at(u, i, log_delta);
  } else {
    for (Index i = 0; i < n; ++i) phi[static_cast<std::size_t>(i)] = phi_at(u, i, log_delta);
  }
}

void phi_per_unit(const PreparedUnits& u, std::span<const double> params, ParamMap map, std::span<double> phi,
                  Exec exec) {
  check_sizes(u, params.size(), phi.size());
  const Index n = u.n();
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
      const auto s = static_cast<std::size_t>(i);
      phi[s] = phi_at(u, i, param_to_log_delta(params[s], map));
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      const auto s = static_cast<std::size_t>(i);
      phi[s] = phi_at(u, i, param_to_log_delta(params[s], map));
    }
  }
}

double reward(const PreparedUnits& u, std::span<const double> params, ParamMap map, Exec exec) {
  std::vector<double> phi(static_cast<std::size_t>(u.n()));
  phi_per_unit(u, params, map, phi, exec);
  return pairwise_sum(phi);
}

void direction_rewards(const PreparedUnits& u, std::span<const double> base, const Eigen::MatrixXd& directions,
                       double nu, ParamMap map, std::span<double> plus, std::span<double> minus, Exec exec) {
  const Index n = u.n();
  const Index m = directions.rows();
  if (static_cast<Index>(base.size()) != n || directions.cols() != n ||
      static_cast<Index>(plus.size()) != m || static_cast<Index>(minus.size()) != m)
    throw Error(ErrorCode::length_mismatch, "direction matrix must be m x n with m reward slots");

  // Job 2k is the + probe of direction k, job 2k+1 the - probe.
  auto run = [&](Index job, std::vector<double>& params, std::vector<double>& phi) {
    const Index k = job / 2;
    const double sign = job % 2 == 0 ? 1.0 : -1.0;
    for (Index i = 0; i < n; ++i) {
      const auto s = static_cast<std::size_t>(i);
      params[s] = base[s] + sign * nu * directions(k, i);
    }
    phi_per_unit(u, params, map, phi, Exec::serial);
    (sign > 0.0 ? plus : minus)[static_cast<std::size_t>(k)] = pairwise_sum(phi);
  };

  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<double> params(static_cast<std::size_t>(n)), phi(static_cast<std::size_t>(n));
#pragma omp for schedule(static)
      for (Index job = 0; job < 2 * m; ++job) run(job, params, phi);
    }
  } else {
    std::vector<double> params(static_cast<std::size_t>(n)), phi(static_cast<std::size_t>(n));
    for (Index job = 0; job < 2 * m; ++job) run(job, params, phi);
  }
}

}  // namespace kernels
}  // namespace sie
