#include "rigidlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rigidlab/errors.hpp"
#include "rigidlab/subresonant_io.hpp"

namespace rigidlab::config {

using dynamics::IntMat;
using dynamics::Mat;
using dynamics::SystemSpec;

namespace {

std::string field(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void schema(const std::string& path, const std::string& what) {
  throw SchemaError("field '" + path + "': " + what);
}

Rational rational_at(const json& v, const std::string& path) {
  try {
    return subres::rational_from_json(v);
  } catch (const Error& e) {
    schema(path, e.detail());
  }
}

IntMat int_matrix(const json& m, const std::string& path) {
  if (!m.is_array() || m.empty()) schema(path, "expected a square integer matrix");
  const auto n = static_cast<long>(m.size());
  IntMat out(n, n);
  for (long i = 0; i < n; ++i) {
    const auto& row = m[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<long>(row.size()) != n) schema(path, "expected a square integer matrix");
    for (long j = 0; j < n; ++j) {
      const auto& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number_integer()) schema(path, "entries must be integers");
      out(i, j) = v.get<long long>();
    }
  }
  return out;
}

Mat real_matrix(const json& m, const std::string& path) {
  if (!m.is_array() || m.empty()) schema(path, "expected a square matrix");
  const auto n = static_cast<long>(m.size());
  Mat out(n, n);
  for (long i = 0; i < n; ++i) {
    const auto& row = m[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<long>(row.size()) != n) schema(path, "expected a square matrix");
    for (long j = 0; j < n; ++j) {
      const auto& v = row[static_cast<std::size_t>(j)];
      if (v.is_number()) out(i, j) = v.get<double>();
      else if (v.is_string()) out(i, j) = to_double(rational_at(v, path));
      else schema(path, "entries must be numbers");
    }
  }
  return out;
}

template <class M>
json matrix_json(const M& m) {
  json out = json::array();
  for (long i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

std::vector<unsigned> unsigned_list(const json& v, const std::string& path) {
  if (!v.is_array()) schema(path, "expected an array of nonnegative integers");
  std::vector<unsigned> out;
  for (const auto& x : v) {
    if (!x.is_number_integer() || x.get<long long>() < 0) schema(path, "expected an array of nonnegative integers");
    out.push_back(x.get<unsigned>());
  }
  return out;
}

}  // namespace

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema(field(path, key), "missing");
  return *it;
}

std::uint64_t get_uint(const json& obj, const std::string& key, const std::string& path,
                       std::optional<std::uint64_t> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    schema(field(path, key), "missing");
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) schema(field(path, key), "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

double get_double(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    schema(field(path, key), "missing");
  }
  const auto& v = obj.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return to_double(rational_at(v, field(path, key)));
  schema(field(path, key), "expected a number");
}

std::string get_string(const json& obj, const std::string& key, const std::string& path,
                       std::optional<std::string> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    schema(field(path, key), "missing");
  }
  const auto& v = obj.at(key);
  if (!v.is_string()) schema(field(path, key), "expected a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) schema(field(path, key), "expected true or false");
  return v.get<bool>();
}

std::vector<double> get_vector(const json& obj, const std::string& key, const std::string& path,
                               std::optional<std::vector<double>> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    schema(field(path, key), "missing");
  }
  const auto& v = obj.at(key);
  if (!v.is_array()) schema(field(path, key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) schema(field(path, key), "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

SystemSpec system_from_json(const json& doc, const std::string& path) {
  const std::string kind = get_string(doc, "kind", path);
  auto build = [&]() -> SystemSpec {
    if (kind == "toral") return SystemSpec::toral(int_matrix(require(doc, "matrix", path), field(path, "matrix")));
    if (kind == "affine")
      return SystemSpec::affine(rational_at(require(doc, "slope", path), field(path, "slope")),
                                rational_at(require(doc, "offset", path), field(path, "offset")));
    if (kind == "rotation") return SystemSpec::rotation(get_double(doc, "angle", path));
    if (kind == "linear") return SystemSpec::linear(real_matrix(require(doc, "matrix", path), field(path, "matrix")));
    if (kind == "perturbed_toral") {
      dynamics::PerturbedToral p;
      p.matrix = int_matrix(require(doc, "matrix", path), field(path, "matrix"));
      p.epsilon = get_double(doc, "epsilon", path);
      const json& terms = require(doc, "terms", path);
      if (!terms.is_array()) schema(field(path, "terms"), "expected an array");
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tp = field(path, "terms[" + std::to_string(i) + "]");
        dynamics::TrigTerm t;
        t.amplitude = get_double(terms[i], "amplitude", tp, 1.0);
        t.direction = get_vector(terms[i], "direction", tp);
        for (double f : get_vector(terms[i], "frequency", tp)) {
          if (f != std::floor(f)) schema(field(tp, "frequency"), "expected integers");
          t.frequency.push_back(static_cast<int>(f));
        }
        t.phase = get_double(terms[i], "phase", tp, 0.0);
        p.terms.push_back(std::move(t));
      }
      return SystemSpec(std::move(p));
    }
    schema(field(path, "kind"), "unknown system kind '" + kind + "'");
  };
  try {
    SystemSpec sys = build();
    return get_bool(doc, "inverse", path, false) ? sys.inverse() : sys;
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    schema(path, e.detail());
  }
}

json to_json(const SystemSpec& system) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, dynamics::ToralAuto>) {
          return {{"kind", "toral"}, {"matrix", matrix_json(v.matrix)}};
        } else if constexpr (std::is_same_v<T, dynamics::AffineInterval>) {
          return {{"kind", "affine"}, {"slope", to_string(v.slope)}, {"offset", to_string(v.offset)}};
        } else if constexpr (std::is_same_v<T, dynamics::CircleRotation>) {
          return {{"kind", "rotation"}, {"angle", v.angle}};
        } else if constexpr (std::is_same_v<T, dynamics::LinearMap>) {
          return {{"kind", "linear"}, {"matrix", matrix_json(v.matrix)}};
        } else {
          json terms = json::array();
          for (const auto& t : v.terms)
            terms.push_back({{"amplitude", t.amplitude},
                             {"direction", t.direction},
                             {"frequency", t.frequency},
                             {"phase", t.phase}});
          return {{"kind", "perturbed_toral"},
                  {"matrix", matrix_json(v.matrix)},
                  {"epsilon", v.epsilon},
                  {"terms", terms}};
        }
      },
      system.variant());
}

walk::WalkMeasure walk_from_json(const json& doc, const std::string& path) {
  if (doc.is_object() && doc.contains("kind")) {
    return walk::WalkMeasure::dirac(system_from_json(doc, path));
  }
  const json& atoms = require(doc, "atoms", path);
  if (!atoms.is_array() || atoms.empty()) schema(field(path, "atoms"), "expected a nonempty array");
  std::vector<walk::WalkMeasure::Atom> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string ap = field(path, "atoms[" + std::to_string(i) + "]");
    SystemSpec sys = system_from_json(require(atoms[i], "system", ap), field(ap, "system"));
    Rational p = atoms[i].contains("p") ? rational_at(atoms[i].at("p"), field(ap, "p"))
                                        : Rational(1, static_cast<unsigned long>(atoms.size()));
    out.push_back({std::move(sys), std::move(p)});
  }
  try {
    return walk::WalkMeasure(std::move(out));
  } catch (const Error& e) {
    schema(path, e.detail());
  }
}

json to_json(const walk::WalkMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"system", to_json(a.system)}, {"p", to_string(a.probability)}});
  return {{"atoms", atoms}};
}

entropy::SpectrumSummary spectrum_from_json(const json& doc, const std::string& path) {
  entropy::SpectrumSummary s;
  s.exponents = get_vector(doc, "exponents", path);
  s.multiplicities = doc.contains("multiplicities")
                         ? unsigned_list(doc.at("multiplicities"), field(path, "multiplicities"))
                         : std::vector<unsigned>(s.exponents.size(), 1u);
  if (doc.contains("dims_e1")) s.dims_e1 = unsigned_list(doc.at("dims_e1"), field(path, "dims_e1"));
  if (doc.contains("dims_e2")) s.dims_e2 = unsigned_list(doc.at("dims_e2"), field(path, "dims_e2"));
  try {
    s.validate();
  } catch (const Error& e) {
    schema(path, e.detail());
  }
  return s;
}

json to_json(const entropy::SpectrumSummary& spec) {
  json out = {{"exponents", spec.exponents}, {"multiplicities", spec.multiplicities}};
  if (spec.dims_e1) out["dims_e1"] = *spec.dims_e1;
  if (spec.dims_e2) out["dims_e2"] = *spec.dims_e2;
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json ExperimentConfig::to_json() const {
  json out = {{"experiment", kind},
              {"output", output},
              {"budgets", {{"words", budgets.words}, {"samples", budgets.samples}, {"seconds", budgets.seconds}}},
              {"payload", payload}};
  if (seed) out["seed"] = *seed;
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  json doc = to_json();
  doc.erase("output");
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool stochastic(const ExperimentConfig& cfg) {
  if (cfg.kind == "lyapunov" || cfg.kind == "walk") return true;
  if (cfg.kind == "expansion") {
    const json& p = cfg.payload;
    const bool mc = p.contains("mode") && p["mode"] == "mc";
    const bool random_grid = p.contains("grid") && p["grid"].is_object() && p["grid"].value("type", "") == "random";
    return mc || random_grid;
  }
  return false;
}

ExperimentConfig config_from_json(const json& doc) {
  static const std::set<std::string> kinds = {"subres", "lyapunov", "expansion", "walk", "entropy"};
  static const std::set<std::string> keys = {"experiment", "seed", "output", "budgets", "payload"};
  if (!doc.is_object()) schema("", "config must be a JSON object");
  for (const auto& [k, v] : doc.items())
    if (!keys.count(k)) schema(k, "unknown top-level field");

  ExperimentConfig cfg;
  cfg.kind = get_string(doc, "experiment", "");
  if (!kinds.count(cfg.kind)) schema("experiment", "unknown experiment kind '" + cfg.kind + "'");
  if (doc.contains("seed")) cfg.seed = get_uint(doc, "seed", "");
  cfg.output = get_string(doc, "output", "", std::string());
  if (doc.contains("budgets")) {
    const json& b = doc.at("budgets");
    if (!b.is_object()) schema("budgets", "expected an object");
    cfg.budgets.words = get_uint(b, "words", "budgets", cfg.budgets.words);
    cfg.budgets.samples = get_uint(b, "samples", "budgets", cfg.budgets.samples);
    cfg.budgets.seconds = get_double(b, "seconds", "budgets", cfg.budgets.seconds);
  }
  cfg.payload = require(doc, "payload", "");
  if (!cfg.payload.is_object()) schema("payload", "expected an object");
  if (stochastic(cfg) && !cfg.seed) schema("seed", "required for " + cfg.kind + " experiments");
  return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

json toral_json(std::initializer_list<std::initializer_list<int>> rows) {
  json m = json::array();
  for (auto r : rows) m.push_back(json(r));
  return {{"kind", "toral"}, {"matrix", m}};
}

ExperimentConfig make(std::string kind, std::optional<std::uint64_t> seed, json payload) {
  ExperimentConfig c;
  c.kind = std::move(kind);
  c.seed = seed;
  c.payload = std::move(payload);
  return c;
}

}  // namespace

std::vector<Fixture> fixtures() {
  const json cat = toral_json({{2, 1}, {1, 1}});
  const json cantor = {{"atoms",
                        {{{"system", {{"kind", "affine"}, {"slope", "1/3"}, {"offset", "0"}}}, {"p", "1/2"}},
                         {{"system", {{"kind", "affine"}, {"slope", "1/3"}, {"offset", "2/3"}}}, {"p", "1/2"}}}}};
  const json golden = {{"kind", "rotation"}, {"angle", (std::sqrt(5.0) - 1.0) / 2.0}};
  const json ab = {{"atoms",
                    {{{"system", toral_json({{2, 1}, {1, 1}})}, {"p", "1/2"}},
                     {{"system", toral_json({{1, 1}, {1, 2}})}, {"p", "1/2"}}}}};
  const json example = {{"weights", json::array({json::array({"2", 1}), json::array({"1", 1})})},
                        {"coeffs",
                         {{{"out", 0}, {"mono", {{"0", 1}}}, {"c", "3"}},
                          {{"out", 0}, {"mono", {{"1", 1}}}, {"c", "1"}},
                          {{"out", 0}, {"mono", {{"1", 2}}}, {"c", "2"}},
                          {{"out", 1}, {"mono", {{"1", 1}}}, {"c", "2"}}}}};

  std::vector<Fixture> out;
  out.push_back({"cat_lyapunov", "Lyapunov spectrum of the cat map [[2,1],[1,1]], n = 10^4",
                 "lambda_1 within 1e-3 of log((3+sqrt 5)/2) = 0.962424; |lambda_1 + lambda_2| <= 1e-9; < 1 s",
                 make("lyapunov", 1, {{"walk", cat}, {"start", {0.1, 0.2}}, {"n", 10000}})});
  out.push_back({"cantor_walk", "Middle-thirds IFS x/3, x/3 + 2/3 with equal weights, N = 10^5, M = 64",
                 "stationarity < 0.02; invariance under x/3 in [0.4, 0.55]; box dimension within 0.05 of 0.6309; < 10 s",
                 make("walk", 7,
                      {{"op", "residuals"},
                       {"walk", cantor},
                       {"start", {0.0}},
                       {"N", 100000},
                       {"M", 64},
                       {"scales", {1.0 / 27, 1.0 / 81, 1.0 / 243, 1.0 / 729, 1.0 / 2187}}})});
  out.push_back({"golden_rotation", "Circle rotation by (sqrt 5 - 1)/2, N = 10^5",
                 "max_{1<=k<=10} |c_k| < 0.01",
                 make("walk", 1,
                      {{"op", "residuals"}, {"walk", golden}, {"start", {0.0}}, {"N", 100000}, {"M", 1}, {"weyl_K", 10}})});
  out.push_back({"ab_expansion", "Uniform expansion scan for {[[2,1],[1,1]], [[1,1],[1,2]]}, N = 8, 720 lines",
                 "exact minimum sigma > 0; < 5 s",
                 make("expansion", std::nullopt,
                      {{"op", "scan"},
                       {"walk", ab},
                       {"N", 8},
                       {"d", 1},
                       {"mode", "exact"},
                       {"grid", {{"type", "angular"}, {"count", 720}}}})});
  out.push_back({"example_map", "Subresonant check of (3x + y + 2y^2, 2y) with weights (2, 1)",
                 "validated, strict=false",
                 make("subres", std::nullopt, {{"op", "check"}, {"map", example}})});
  const double lam = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  out.push_back({"cat_entropy", "Stiffness chain for the cat map with Z the full tangent bundle",
                 "signed sum 0, stiffness-consistent; Pesin sum 0.962424",
                 make("entropy", std::nullopt,
                      {{"op", "stiffness"},
                       {"walk", cat},
                       {"spectrum", {{"exponents", {lam, -lam}}, {"multiplicities", {1, 1}},
                                     {"dims_e1", {1, 0}}, {"dims_e2", {1, 1}}}}})});
  return out;
}

}  // namespace rigidlab::config
