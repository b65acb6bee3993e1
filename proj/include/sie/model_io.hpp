#pragma once

#include "sie/cross_fit.hpp"

#include <json.hpp>

namespace sie {

using Json = nlohmann::ordered_json;

Json to_json(const Standardizer& s);
Json to_json(const BasisExpansion& b);
Json to_json(const PropensityModel& m);
Json to_json(const Regressor& r);
Json to_json(const OutcomeModel& m);
Json to_json(const NuisancePair& p);

/// Inverse of to_json. Throws ModelFormat on missing or mistyped fields.
Standardizer standardizer_from_json(const Json& j);
BasisExpansion basis_from_json(const Json& j);
PropensityModel propensity_from_json(const Json& j);
Regressor regressor_from_json(const Json& j);
OutcomeModel outcome_from_json(const Json& j);
NuisancePair nuisance_pair_from_json(const Json& j);

}  // namespace sie
