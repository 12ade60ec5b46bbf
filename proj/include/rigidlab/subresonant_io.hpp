#pragma once

// JSON form of filtered spaces and polynomial maps:
//   {"weights": [["2",1],["1",1]],
//    "coeffs":  [{"out":0, "mono":{"1":2}, "c":"2"}, ...]}
// Rationals are decimal or fraction strings (plain JSON integers are also
// accepted). "mono" maps coordinate index to exponent; {} is the constant.

#include <json.hpp>

#include "rigidlab/subresonant.hpp"

namespace rigidlab::subres {

FilteredSpace space_from_json(const nlohmann::json& weights);
nlohmann::json to_json(const FilteredSpace& space);

PolynomialMap map_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PolynomialMap& map);
nlohmann::json to_json(const LinearizationMatrix& lin);

// {"base": <map>, "fiber_weights": ["5","2"],
//  "fiber": [{"out":0,"in":1,"mono":{"0":1},"c":"1"}, ...]}
FiberedCocycleMap fibered_from_json(const nlohmann::json& doc);

Rational rational_from_json(const nlohmann::json& v);

}  // namespace rigidlab::subres
