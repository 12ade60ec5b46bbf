#pragma once

// Experiment dispatch: a validated config in, CSV/JSON artifacts out. Files
// are produced in memory first and written atomically with a metadata
// sidecar, so a failed run leaves nothing behind.

#include <string>
#include <vector>

#include "rigidlab/config.hpp"
#include "rigidlab/errors.hpp"
#include "rigidlab/random_walk.hpp"

namespace rigidlab::experiments {

struct Artifact {
  std::string name;  // file name inside the output directory
  std::string content;
};

struct RunResult {
  std::vector<Artifact> files;
  std::string summary;  // human-readable, printed by the CLI
};

// Deterministic in (config, seed) regardless of the thread count. Throws the
// module errors, SchemaError for payload problems and BudgetExceeded.
RunResult run(const config::ExperimentConfig& cfg);

// Writes every artifact plus run.meta.json (config hash, version, wall
// time) into cfg.output. Files are staged under temporary names and renamed
// once all of them are written.
void write_outputs(const config::ExperimentConfig& cfg, const RunResult& result, double wall_seconds);

// 2 for SchemaError, 3 for BudgetExceeded, 1 otherwise.
int exit_code(const Error& e);

std::string format_double(double v);

std::string measure_csv(const walk::EmpiricalMeasure& nu);
// Reads the measure CSV format (coordinates then weight; '#' lines and the
// header are skipped). Throws SchemaError.
walk::EmpiricalMeasure read_measure_csv(const std::string& text, const dynamics::Space& space);

}  // namespace rigidlab::experiments
