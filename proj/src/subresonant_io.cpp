#include "rigidlab/subresonant_io.hpp"

#include <set>

#include "rigidlab/errors.hpp"

namespace rigidlab::subres {

using nlohmann::json;

namespace {

bool is_index(const json& v) { return v.is_number_integer() && v.get<long long>() >= 0; }

}  // namespace

Rational rational_from_json(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw SchemaError("expected a rational string or integer, got " + v.dump());
}

FilteredSpace space_from_json(const json& weights) {
  if (!weights.is_array() || weights.empty()) throw SchemaError("\"weights\" must be a nonempty array");
  std::vector<FilteredSpace::Level> levels;
  for (const auto& w : weights) {
    if (!w.is_array() || w.size() != 2 || !is_index(w[1]))
      throw SchemaError("each weight must be [\"rational\", multiplicity], got " + w.dump());
    levels.push_back({rational_from_json(w[0]), w[1].get<std::size_t>()});
  }
  return FilteredSpace(std::move(levels));
}

json to_json(const FilteredSpace& space) {
  json out = json::array();
  for (const auto& l : space.levels()) out.push_back({rigidlab::to_string(l.weight), l.multiplicity});
  return out;
}

namespace {

MultiIndex mono_from_json(const json& mono, std::size_t dim) {
  if (!mono.is_object()) throw SchemaError("\"mono\" must be an object, got " + mono.dump());
  MultiIndex a(dim);
  for (const auto& [key, e] : mono.items()) {
    std::size_t idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoul(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw SchemaError("monomial key '" + key + "' is not a coordinate index");
    }
    if (idx >= dim) throw InvalidCoordinate("monomial references coordinate " + key + " of a " + std::to_string(dim) + "-dimensional space");
    if (!is_index(e)) throw SchemaError("exponent must be a nonnegative integer");
    a.exponents[idx] = e.get<std::uint32_t>();
  }
  return a;
}

json mono_to_json(const MultiIndex& a) {
  json m = json::object();
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.exponents[i] != 0) m[std::to_string(i)] = a.exponents[i];
  return m;
}

}  // namespace

PolynomialMap map_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("weights") || !doc.contains("coeffs"))
    throw SchemaError("map document needs \"weights\" and \"coeffs\"");
  FilteredSpace space = space_from_json(doc.at("weights"));
  PolynomialMap map(space);
  std::set<std::pair<std::size_t, MultiIndex>> seen;
  for (const auto& t : doc.at("coeffs")) {
    if (!t.is_object() || !t.contains("out") || !t.contains("mono") || !t.contains("c"))
      throw SchemaError("each coefficient needs \"out\", \"mono\", \"c\": " + t.dump());
    if (!is_index(t.at("out"))) throw SchemaError("\"out\" must be a coordinate index");
    auto j = t.at("out").get<std::size_t>();
    if (j >= space.dim()) throw InvalidCoordinate("output coordinate " + std::to_string(j) + " out of range");
    MultiIndex a = mono_from_json(t.at("mono"), space.dim());
    if (!seen.emplace(j, a).second)
      throw MalformedStructure("duplicate coefficient for output " + std::to_string(j) + " monomial " + to_string(a));
    map.add(j, a, rational_from_json(t.at("c")));
  }
  return map;
}

json to_json(const PolynomialMap& map) {
  json coeffs = json::array();
  for (std::size_t j = 0; j < map.components().size(); ++j)
    for (const auto& [a, c] : map.component(j))
      coeffs.push_back({{"out", j}, {"mono", mono_to_json(a)}, {"c", rigidlab::to_string(c)}});
  return {{"weights", to_json(map.domain())}, {"coeffs", coeffs}};
}

json to_json(const LinearizationMatrix& lin) {
  json basis = json::array(), rows = json::array();
  for (const auto& a : lin.basis) basis.push_back(to_string(a));
  for (std::size_t i = 0; i < lin.entries.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < lin.entries.cols; ++j) row.push_back(rigidlab::to_string(lin.entries.at(i, j)));
    rows.push_back(row);
  }
  return {{"basis", basis}, {"affine", lin.affine}, {"matrix", rows}};
}

FiberedCocycleMap fibered_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("base") || !doc.contains("fiber_weights"))
    throw SchemaError("fibered map needs \"base\" and \"fiber_weights\"");
  FiberedCocycleMap c{validate(map_from_json(doc.at("base"))), {}, {}};
  for (const auto& w : doc.at("fiber_weights")) c.fiber_weights.push_back(rational_from_json(w));
  const std::size_t dim = c.base.space().dim();
  for (const auto& t : doc.value("fiber", json::array())) {
    if (!t.contains("out") || !t.contains("in") || !t.contains("c"))
      throw SchemaError("fiber term needs \"out\", \"in\", \"c\"");
    c.terms.push_back({t.at("out").get<std::size_t>(), t.at("in").get<std::size_t>(),
                       mono_from_json(t.value("mono", json::object()), dim), rational_from_json(t.at("c"))});
  }
  return c;
}

}  // namespace rigidlab::subres
