#pragma once

// JSON documents for generators, walks, spectra and experiment configs, and
// the built-in fixture catalog.
//
//   system:  {"kind":"toral","matrix":[[2,1],[1,1]]}
//            {"kind":"affine","slope":"1/3","offset":"2/3"}
//            {"kind":"rotation","angle":0.618}
//            {"kind":"perturbed_toral","matrix":..,"epsilon":0.01,
//             "terms":[{"amplitude":1,"direction":[1,0],"frequency":[0,1],"phase":0}]}
//            {"kind":"linear","matrix":[[2,0],[0,0.5]]}
//            any of these may carry "inverse": true
//   walk:    {"atoms":[{"system":{..},"p":"1/2"}, ..]}
//   spectrum:{"exponents":[..],"multiplicities":[..],"dims_e1":[..],"dims_e2":[..]}

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigidlab/entropy.hpp"
#include "rigidlab/system.hpp"
#include "rigidlab/walk_measure.hpp"

namespace rigidlab::config {

using nlohmann::json;

// All parsers throw SchemaError naming the offending field path.
dynamics::SystemSpec system_from_json(const json& doc, const std::string& path = "system");
json to_json(const dynamics::SystemSpec& system);

walk::WalkMeasure walk_from_json(const json& doc, const std::string& path = "walk");
json to_json(const walk::WalkMeasure& mu);

entropy::SpectrumSummary spectrum_from_json(const json& doc, const std::string& path = "spectrum");
json to_json(const entropy::SpectrumSummary& spec);

struct Budgets {
  std::uint64_t words = std::uint64_t{1} << 20;
  std::uint64_t samples = std::uint64_t{1} << 28;
  double seconds = 600.0;
};

struct ExperimentConfig {
  std::string kind;  // subres | lyapunov | expansion | walk | entropy
  std::optional<std::uint64_t> seed;
  std::string output;  // directory; empty means stdout
  Budgets budgets;
  json payload;

  // FNV-1a of the canonical serialization, output path excluded.
  std::uint64_t hash() const;
  json to_json() const;
};

// Throws SchemaError (with line/column for malformed JSON).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig config_from_json(const json& doc);
ExperimentConfig load_config(const std::string& path);

bool stochastic(const ExperimentConfig& cfg);

std::string hex64(std::uint64_t v);

// Field helpers shared with the experiment runner.
const json& require(const json& obj, const std::string& key, const std::string& path);
std::uint64_t get_uint(const json& obj, const std::string& key, const std::string& path,
                       std::optional<std::uint64_t> fallback = std::nullopt);
double get_double(const json& obj, const std::string& key, const std::string& path,
                  std::optional<double> fallback = std::nullopt);
std::string get_string(const json& obj, const std::string& key, const std::string& path,
                       std::optional<std::string> fallback = std::nullopt);
bool get_bool(const json& obj, const std::string& key, const std::string& path, bool fallback);
std::vector<double> get_vector(const json& obj, const std::string& key, const std::string& path,
                               std::optional<std::vector<double>> fallback = std::nullopt);

struct Fixture {
  std::string name;
  std::string description;
  std::string target;
  ExperimentConfig config;
};

std::vector<Fixture> fixtures();

}  // namespace rigidlab::config
