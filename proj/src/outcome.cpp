#include "sie/outcome.hpp"

#include "sie/error.hpp"

#include <algorithm>
#include <numeric>

namespace sie {

double StumpBooster::predict(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  double sum = 0.0;
  for (const auto& s : stumps) sum += features[s.feature] <= s.threshold ? s.left : s.right;
  return base + learning_rate * sum;
}

StumpBooster fit_stump_booster(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, int rounds,
                               double learning_rate) {
  const Index n = features.rows();
  const Index d = features.cols();
  if (n == 0) throw Error(ErrorCode::degenerate_design, "boosting needs at least one row");
  if (rounds < 0 || !(learning_rate > 0.0 && learning_rate <= 1.0))
    throw Error(ErrorCode::invalid_config, "boosting needs rounds >= 0 and learning rate in (0,1]");

  StumpBooster model;
  model.learning_rate = learning_rate;
  model.base = target.mean();
  Eigen::VectorXd fitted = Eigen::VectorXd::Constant(n, model.base);
  Eigen::VectorXd resid = target - fitted;
  model.training_loss.push_back(resid.squaredNorm() / static_cast<double>(n));

  std::vector<std::vector<Index>> order(static_cast<std::size_t>(d));
  for (Index f = 0; f < d; ++f) {
    auto& o = order[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(n));
    std::iota(o.begin(), o.end(), Index{0});
    std::stable_sort(o.begin(), o.end(), [&](Index a, Index b) { return features(a, f) < features(b, f); });
  }

  for (int round = 0; round < rounds; ++round) {
    const double total = resid.sum();
    double best_gain = 0.0;
    Stump best;
    bool found = false;
    for (Index f = 0; f < d; ++f) {
      const auto& o = order[static_cast<std::size_t>(f)];
      double left_sum = 0.0;
      for (Index pos = 0; pos + 1 < n; ++pos) {
        left_sum += resid[o[static_cast<std::size_t>(pos)]];
        const double a = features(o[static_cast<std::size_t>(pos)], f);
        const double b = features(o[static_cast<std::size_t>(pos + 1)], f);
        if (!(a < b)) continue;
        const auto nl = static_cast<double>(pos + 1);
        const auto nr = static_cast<double>(n - pos - 1);
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - total * total / static_cast<double>(n);
        if (gain > best_gain) {
          best_gain = gain;
          best = Stump{f, 0.5 * (a + b), left_sum / nl, right_sum / nr};
          found = true;
        }
      }
    }
    if (!found || best_gain <= 1e-14 * (1.0 + resid.squaredNorm())) break;
    for (Index i = 0; i < n; ++i) {
      const double leaf = features(i, best.feature) <= best.threshold ? best.left : best.right;
      fitted[i] += learning_rate * leaf;
    }
    resid = target - fitted;
    model.stumps.push_back(best);
    model.training_loss.push_back(resid.squaredNorm() / static_cast<double>(n));
  }
  return model;
}

double LinearRidge::predict(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  return coef[0] + coef.tail(coef.size() - 1).dot(features);
}

LinearRidge fit_linear_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, double ridge) {
  const Index n = features.rows();
  if (n == 0) throw Error(ErrorCode::degenerate_design, "linear fit needs at least one row");
  if (!(ridge >= 0.0)) throw Error(ErrorCode::invalid_config, "ridge strength must be >= 0");
  Eigen::MatrixXd design(n, features.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(features.cols()) = features;
  Eigen::MatrixXd gram = design.transpose() * design;
  gram.diagonal().tail(features.cols()).array() += ridge;
  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    if (qr.rank() < gram.cols())
      throw Error(ErrorCode::degenerate_design, "singular design without ridge (rank " +
                                                    std::to_string(qr.rank()) + " < " + std::to_string(gram.cols()) + ")");
  }
  LinearRidge model;
  model.coef = gram.ldlt().solve(design.transpose() * target);
  if (!model.coef.allFinite()) throw Error(ErrorCode::degenerate_design, "linear solve produced non-finite coefficients");
  return model;
}

double predict(const Regressor& r, const Eigen::Ref<const Eigen::VectorXd>& features) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantRegressor>) {
          return m.value;
        } else {
          return m.predict(features);
        }
      },
      r);
}

const char* to_string(OutcomeLearner learner) {
  switch (learner) {
    case OutcomeLearner::least_squares_linear: return "linear";
    case OutcomeLearner::boosted_stumps: return "gbstumps";
    case OutcomeLearner::constant_mean: return "mean";
  }
  return "?";
}

const char* to_string(OutcomeMode mode) { return mode == OutcomeMode::joint ? "joint" : "per_arm"; }

OutcomeLearner outcome_learner_from_string(const std::string& s) {
  if (s == "linear") return OutcomeLearner::least_squares_linear;
  if (s == "gbstumps") return OutcomeLearner::boosted_stumps;
  if (s == "mean") return OutcomeLearner::constant_mean;
  throw Error(ErrorCode::invalid_config, "unknown outcome learner '" + s + "'");
}

double OutcomeModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x, int t) const {
  const Eigen::VectorXd xs = standardizer.apply(x);
  if (mode == OutcomeMode::per_arm) return sie::predict(regressors[static_cast<std::size_t>(t)], xs);
  Eigen::VectorXd features(xs.size() + 1);
  features.head(xs.size()) = xs;
  features[xs.size()] = static_cast<double>(t);
  return sie::predict(regressors.front(), features);
}

namespace {

Regressor fit_regressor(const Eigen::MatrixXd& features, const Eigen::VectorXd& target, const OutcomeConfig& cfg) {
  switch (cfg.learner) {
    case OutcomeLearner::least_squares_linear: return fit_linear_ridge(features, target, cfg.ridge);
    case OutcomeLearner::boosted_stumps: return fit_stump_booster(features, target, cfg.rounds, cfg.learning_rate);
    case OutcomeLearner::constant_mean: return ConstantRegressor{target.mean()};
  }
  throw Error(ErrorCode::invalid_config, "unhandled outcome learner");
}

}  // namespace

OutcomeModel fit_outcome(const Dataset& ds, std::span<const Index> idx, const OutcomeConfig& cfg) {
  if (idx.empty()) throw Error(ErrorCode::degenerate_design, "outcome fit needs at least one unit");
  OutcomeModel model;
  model.learner = cfg.learner;
  model.mode = cfg.mode;
  model.standardizer = Standardizer::fit(ds.x, idx);

  // The global-mean learner ignores covariates and arms.
  if (cfg.learner == OutcomeLearner::constant_mean) {
    double sum = 0.0;
    for (Index i : idx) sum += ds.y[i];
    model.mode = OutcomeMode::joint;
    model.regressors.push_back(ConstantRegressor{sum / static_cast<double>(idx.size())});
    return model;
  }

  if (cfg.mode == OutcomeMode::joint) {
    const auto m = static_cast<Index>(idx.size());
    Eigen::MatrixXd features(m, ds.d() + 1);
    Eigen::VectorXd target(m);
    for (Index r = 0; r < m; ++r) {
      features.row(r).head(ds.d()) = model.standardizer.apply(ds.x.row(idx[r]).transpose()).transpose();
      features(r, ds.d()) = ds.t[idx[r]];
      target[r] = ds.y[idx[r]];
    }
    model.regressors.push_back(fit_regressor(features, target, cfg));
    return model;
  }

  for (int arm = 0; arm < 2; ++arm) {
    std::vector<Index> rows;
    for (Index i : idx)
      if (ds.t[i] == arm) rows.push_back(i);
    if (rows.empty())
      throw Error(ErrorCode::empty_arm, std::string(arm == 1 ? "treated" : "control") + " arm is empty");
    const auto m = static_cast<Index>(rows.size());
    Eigen::MatrixXd features(m, ds.d());
    Eigen::VectorXd target(m);
    for (Index r = 0; r < m; ++r) {
      features.row(r) = model.standardizer.apply(ds.x.row(rows[static_cast<std::size_t>(r)]).transpose()).transpose();
      target[r] = ds.y[rows[static_cast<std::size_t>(r)]];
    }
    model.regressors.push_back(fit_regressor(features, target, cfg));
  }
  return model;
}

}  // namespace sie
