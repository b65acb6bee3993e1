#include "sie/model_io.hpp"

#include "sie/error.hpp"

namespace sie {

namespace {

Json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json row_json(const Eigen::RowVectorXd& v) { return vec_json(v.transpose()); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::model_format, std::string("missing field '") + key + "'");
  return j.at(key);
}

Eigen::VectorXd vec_from(const Json& j, const char* key) {
  const Json& a = field(j, key);
  if (!a.is_array()) throw Error(ErrorCode::model_format, std::string("field '") + key + "' must be an array");
  Eigen::VectorXd v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw Error(ErrorCode::model_format, std::string("field '") + key + "' must hold numbers");
    v[static_cast<Index>(i)] = a[i].get<double>();
  }
  return v;
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::model_format, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const Standardizer& s) { return Json{{"mean", row_json(s.mean)}, {"scale", row_json(s.scale)}}; }

Json to_json(const BasisExpansion& b) {
  Json centers = Json::array();
  for (Index r = 0; r < b.centers.rows(); ++r) centers.push_back(vec_json(b.centers.row(r).transpose()));
  return Json{{"kind", to_string(b.kind)}, {"d", b.d}, {"centers", centers}, {"bandwidth", b.bandwidth}};
}

Json to_json(const PropensityModel& m) {
  return Json{{"type", "basis_logistic"},
              {"standardizer", to_json(m.standardizer)},
              {"basis", to_json(m.basis)},
              {"beta", vec_json(m.beta)},
              {"clip", Json::array({m.clip_lo, m.clip_hi})},
              {"converged", m.converged},
              {"iterations", m.iterations},
              {"gradient_norm", m.gradient_norm}};
}

Json to_json(const Regressor& r) {
  return std::visit(
      [](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearRidge>) {
          return Json{{"type", "linear"}, {"coef", vec_json(m.coef)}};
        } else if constexpr (std::is_same_v<T, StumpBooster>) {
          Json stumps = Json::array();
          for (const auto& s : m.stumps)
            stumps.push_back(Json{{"feature", s.feature}, {"threshold", s.threshold}, {"left", s.left}, {"right", s.right}});
          return Json{{"type", "gbstumps"}, {"base", m.base}, {"learning_rate", m.learning_rate}, {"stumps", stumps}};
        } else {
          return Json{{"type", "constant"}, {"value", m.value}};
        }
      },
      r);
}

Json to_json(const OutcomeModel& m) {
  Json regs = Json::array();
  for (const auto& r : m.regressors) regs.push_back(to_json(r));
  return Json{{"learner", to_string(m.learner)},
              {"mode", to_string(m.mode)},
              {"standardizer", to_json(m.standardizer)},
              {"regressors", regs}};
}

Json to_json(const NuisancePair& p) {
  return Json{{"fold", p.fold},
              {"fitted_on", p.fitted_on},
              {"propensity", to_json(p.propensity)},
              {"outcome", to_json(p.outcome)}};
}

Standardizer standardizer_from_json(const Json& j) {
  Standardizer s;
  s.mean = vec_from(j, "mean").transpose();
  s.scale = vec_from(j, "scale").transpose();
  if (s.mean.size() != s.scale.size()) throw Error(ErrorCode::model_format, "standardizer mean/scale length mismatch");
  return s;
}

BasisExpansion basis_from_json(const Json& j) {
  BasisExpansion b;
  try {
    b.kind = basis_kind_from_string(get<std::string>(j, "kind"));
  } catch (const Error& e) {
    throw Error(ErrorCode::model_format, e.detail());
  }
  b.d = get<Index>(j, "d");
  b.bandwidth = get<double>(j, "bandwidth");
  const Json& centers = field(j, "centers");
  b.centers.resize(static_cast<Index>(centers.size()), b.d);
  for (std::size_t r = 0; r < centers.size(); ++r) {
    const auto row = centers[r].get<std::vector<double>>();
    if (static_cast<Index>(row.size()) != b.d) throw Error(ErrorCode::model_format, "RBF center has wrong dimension");
    for (Index c = 0; c < b.d; ++c) b.centers(static_cast<Index>(r), c) = row[static_cast<std::size_t>(c)];
  }
  return b;
}

PropensityModel propensity_from_json(const Json& j) {
  PropensityModel m;
  m.standardizer = standardizer_from_json(field(j, "standardizer"));
  m.basis = basis_from_json(field(j, "basis"));
  m.beta = vec_from(j, "beta");
  if (m.beta.size() != m.basis.size()) throw Error(ErrorCode::model_format, "beta length does not match the basis");
  const auto clip = get<std::vector<double>>(j, "clip");
  if (clip.size() != 2) throw Error(ErrorCode::model_format, "clip must hold [lo, hi]");
  m.clip_lo = clip[0];
  m.clip_hi = clip[1];
  m.converged = get<bool>(j, "converged");
  m.iterations = get<int>(j, "iterations");
  m.gradient_norm = get<double>(j, "gradient_norm");
  return m;
}

Regressor regressor_from_json(const Json& j) {
  const auto type = get<std::string>(j, "type");
  if (type == "linear") return LinearRidge{vec_from(j, "coef")};
  if (type == "constant") return ConstantRegressor{get<double>(j, "value")};
  if (type == "gbstumps") {
    StumpBooster b;
    b.base = get<double>(j, "base");
    b.learning_rate = get<double>(j, "learning_rate");
    for (const auto& s : field(j, "stumps"))
      b.stumps.push_back(Stump{get<Index>(s, "feature"), get<double>(s, "threshold"), get<double>(s, "left"),
                               get<double>(s, "right")});
    return b;
  }
  throw Error(ErrorCode::model_format, "unknown regressor type '" + type + "'");
}

OutcomeModel outcome_from_json(const Json& j) {
  OutcomeModel m;
  try {
    m.learner = outcome_learner_from_string(get<std::string>(j, "learner"));
  } catch (const Error& e) {
    throw Error(ErrorCode::model_format, e.detail());
  }
  const auto mode = get<std::string>(j, "mode");
  if (mode != "joint" && mode != "per_arm") throw Error(ErrorCode::model_format, "unknown outcome mode '" + mode + "'");
  m.mode = mode == "joint" ? OutcomeMode::joint : OutcomeMode::per_arm;
  m.standardizer = standardizer_from_json(field(j, "standardizer"));
  for (const auto& r : field(j, "regressors")) m.regressors.push_back(regressor_from_json(r));
  if (m.regressors.size() != (m.mode == OutcomeMode::joint ? 1u : 2u))
    throw Error(ErrorCode::model_format, "regressor count does not match the outcome mode");
  return m;
}

NuisancePair nuisance_pair_from_json(const Json& j) {
  NuisancePair p;
  p.fold = get<int>(j, "fold");
  p.fitted_on = get<std::vector<Index>>(j, "fitted_on");
  p.propensity = propensity_from_json(field(j, "propensity"));
  p.outcome = outcome_from_json(field(j, "outcome"));
  return p;
}

}  // namespace sie
