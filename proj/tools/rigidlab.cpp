#include <chrono>
#include <deque>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rigidlab/config.hpp"
#include "rigidlab/errors.hpp"
#include "rigidlab/experiments.hpp"

using namespace rigidlab;
using config::ExperimentConfig;
using config::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": malformed JSON: " + e.what());
  }
}

struct Overrides {
  std::uint64_t seed = 0;
  std::string out;
  std::uint64_t budget_words = 0;
  std::uint64_t budget_samples = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* words_opt = nullptr;
  CLI::Option* samples_opt = nullptr;

  void attach(CLI::App* app) {
    seed_opt = app->add_option("--seed", seed, "RNG seed");
    out_opt = app->add_option("--out", out, "output directory");
    words_opt = app->add_option("--budget-words", budget_words, "maximum number of enumerated words");
    samples_opt = app->add_option("--budget-samples", budget_samples, "maximum number of samples or steps");
  }

  void apply(ExperimentConfig& cfg) const {
    if (seed_opt && seed_opt->count()) cfg.seed = seed;
    if (out_opt && out_opt->count()) cfg.output = out;
    if (words_opt && words_opt->count()) cfg.budgets.words = budget_words;
    if (samples_opt && samples_opt->count()) cfg.budgets.samples = budget_samples;
  }
};

// --config may hold a full experiment config, a bare payload, or (for walk
// style commands) a walk or system document.
ExperimentConfig from_document(const std::string& kind, const std::string& path) {
  if (path.empty()) return config::config_from_json({{"experiment", kind}, {"seed", 1}, {"payload", json::object()}});
  json doc = read_json(path);
  if (doc.is_object() && doc.contains("experiment")) {
    auto cfg = config::config_from_json(doc);
    if (cfg.kind != kind) throw SchemaError("field 'experiment': expected '" + kind + "', got '" + cfg.kind + "'");
    return cfg;
  }
  json payload = doc;
  if (doc.is_object() && (doc.contains("atoms") || doc.contains("kind"))) payload = {{"walk", doc}};
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.payload = payload;
  return cfg;
}

void finish_config(ExperimentConfig& cfg) {
  if (config::stochastic(cfg) && !cfg.seed) cfg.seed = 1;
  // Round-trip through the parser so overrides are validated like files.
  cfg = config::config_from_json(cfg.to_json());
}

int execute(ExperimentConfig cfg) {
  finish_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  auto result = experiments::run(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (wall > cfg.budgets.seconds)
    throw BudgetExceeded("wall time " + experiments::format_double(wall) + " s exceeds the budget of " +
                         experiments::format_double(cfg.budgets.seconds) + " s");
  std::cout << result.summary << "\n";
  if (!cfg.output.empty()) {
    experiments::write_outputs(cfg, result, wall);
  } else {
    for (const auto& f : result.files) std::cout << "== " << f.name << "\n" << f.content;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::deque<Overrides> overrides;
  auto attach = [&](CLI::App* sub) -> Overrides& {
    overrides.emplace_back().attach(sub);
    return overrides.back();
  };

  CLI::App app{"rigidlab: measure-rigidity numerics laboratory"};
  app.set_version_flag("--version", RIGIDLAB_VERSION);
  app.require_subcommand(1);

  std::function<int()> action;

  // run
  auto* run = app.add_subcommand("run", "run an experiment config file");
  std::string run_path;
  run->add_option("config", run_path, "experiment config (JSON)")->required();
  auto& run_ov = attach(run);
  run->callback([&] {
    action = [&] {
      auto cfg = config::load_config(run_path);
      run_ov.apply(cfg);
      return execute(cfg);
    };
  });

  // fixtures
  auto* fx = app.add_subcommand("fixtures", "list the built-in fixtures");
  std::string fx_write, fx_run;
  fx->add_option("--write", fx_write, "write each fixture config to DIR/<name>.json");
  fx->add_option("--run", fx_run, "run the named fixture");
  auto& fx_ov = attach(fx);
  fx->callback([&] {
    action = [&] {
      const auto all = config::fixtures();
      if (!fx_run.empty()) {
        for (const auto& f : all)
          if (f.name == fx_run) {
            auto cfg = f.config;
            fx_ov.apply(cfg);
            return execute(cfg);
          }
        throw SchemaError("unknown fixture '" + fx_run + "'");
      }
      for (const auto& f : all) {
        std::cout << f.name << "\n  " << f.description << "\n  target: " << f.target << "\n";
        if (!fx_write.empty()) {
          std::filesystem::create_directories(fx_write);
          std::ofstream(std::filesystem::path(fx_write) / (f.name + ".json")) << f.config.to_json().dump(2) << "\n";
        }
      }
      return 0;
    };
  });

  // subres
  auto* sr = app.add_subcommand("subres", "subresonant map algebra");
  sr->require_subcommand(1);
  std::string map1, map2;
  bool strict = false, affine = false;
  for (const char* op : {"check", "compose", "invert", "linearize"}) {
    auto* sub = sr->add_subcommand(op);
    sub->add_option("map", map1, "map JSON")->required();
    if (std::string(op) == "compose") sub->add_option("map2", map2, "right factor JSON")->required();
    if (std::string(op) == "check") sub->add_flag("--strict", strict, "require strict subresonance");
    if (std::string(op) == "linearize") sub->add_flag("--affine", affine, "include the constant monomial");
    auto& sr_ov = attach(sub);
    sub->callback([&, &sr_ov = sr_ov, op = std::string(op)] {
      action = [&, op] {
        json payload = {{"op", op}, {"map", read_json(map1)}, {"strict", strict}, {"affine", affine}};
        if (op == "compose") payload["map2"] = read_json(map2);
        ExperimentConfig cfg;
        cfg.kind = "subres";
        cfg.payload = payload;
        sr_ov.apply(cfg);
        return execute(cfg);
      };
    });
  }

  // lyapunov
  auto* ly = app.add_subcommand("lyapunov", "Lyapunov spectrum by QR iteration");
  std::string ly_config;
  std::uint64_t ly_n = 0;
  ly->add_option("--config", ly_config, "config, payload or walk JSON")->required();
  auto* ly_n_opt = ly->add_option("--n", ly_n, "number of steps");
  auto& ly_ov = attach(ly);
  ly->callback([&] {
    action = [&] {
      auto cfg = from_document("lyapunov", ly_config);
      if (ly_n_opt->count()) cfg.payload["n"] = ly_n;
      if (!cfg.payload.contains("n")) cfg.payload["n"] = 10000;
      ly_ov.apply(cfg);
      return execute(cfg);
    };
  });

  // expansion
  auto* ex = app.add_subcommand("expansion", "uniform expansion and uniform gaps scans");
  ex->require_subcommand(1);
  std::string ex_config, ex_mode;
  std::uint64_t ex_N = 0, ex_d = 0, ex_count = 0, ex_samples = 0;
  int ex_delta = 1;
  for (const char* op : {"scan", "gaps"}) {
    auto* sub = ex->add_subcommand(op);
    sub->add_option("--config", ex_config, "config, payload or walk JSON")->required();
    auto* mode = sub->add_option("--mode", ex_mode, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
    auto* n = sub->add_option("--N", ex_N, "word length");
    auto* d = sub->add_option("--d", ex_d, "plane dimension");
    auto* count = sub->add_option("--count", ex_count, "angular grid size");
    auto* samples = sub->add_option("--samples", ex_samples, "Monte Carlo samples per plane");
    auto* delta = std::string(op) == "gaps" ? sub->add_option("--delta", ex_delta, "+1 or -1") : nullptr;
    auto& ex_ov = attach(sub);
    sub->callback([&, &ex_ov = ex_ov, op = std::string(op), mode, n, d, count, samples, delta] {
      action = [&, op, mode, n, d, count, samples, delta] {
        auto cfg = from_document("expansion", ex_config);
        cfg.payload["op"] = op;
        if (mode->count()) cfg.payload["mode"] = ex_mode;
        if (n->count()) cfg.payload["N"] = ex_N;
        if (d->count()) cfg.payload["d"] = ex_d;
        if (samples->count()) cfg.payload["samples"] = ex_samples;
        if (delta && delta->count()) cfg.payload["delta"] = ex_delta;
        if (count->count()) {
          if (!cfg.payload.contains("grid")) cfg.payload["grid"] = json::object();
          cfg.payload["grid"]["count"] = ex_count;
        }
        ex_ov.apply(cfg);
        return execute(cfg);
      };
    });
  }

  // walk
  auto* wk = app.add_subcommand("walk", "random walk simulation and diagnostics");
  wk->require_subcommand(1);
  std::string wk_config, wk_measure;
  std::uint64_t wk_N = 0, wk_M = 0, wk_K = 0;
  std::vector<double> wk_scales;
  for (const char* op : {"simulate", "residuals", "dimension"}) {
    auto* sub = wk->add_subcommand(op);
    sub->add_option("--config", wk_config, "config, payload or walk JSON")->required();
    auto* n = sub->add_option("--N", wk_N, "steps per path");
    auto* m = sub->add_option("--M", wk_M, "number of paths");
    auto* meas = std::string(op) == "simulate" ? nullptr : sub->add_option("--measure", wk_measure, "measure CSV");
    auto* k = sub->add_option("--K", wk_K, "Fourier cutoff on tori");
    auto* scales = sub->add_option("--scales", wk_scales, "box-counting scales");
    auto& wk_ov = attach(sub);
    sub->callback([&, &wk_ov = wk_ov, op = std::string(op), n, m, meas, k, scales] {
      action = [&, op, n, m, meas, k, scales] {
        auto cfg = from_document("walk", wk_config);
        cfg.payload["op"] = op;
        if (n->count()) cfg.payload["N"] = wk_N;
        if (m->count()) cfg.payload["M"] = wk_M;
        if (k->count()) cfg.payload["K"] = wk_K;
        if (meas && meas->count()) cfg.payload["measure"] = wk_measure;
        if (scales->count()) cfg.payload["scales"] = wk_scales;
        wk_ov.apply(cfg);
        return execute(cfg);
      };
    });
  }

  // entropy
  auto* en = app.add_subcommand("entropy", "entropy calculators");
  en->require_subcommand(1);
  std::string en_spectrum, en_config;
  double en_H = 0, en_h = 0;
  for (const char* op : {"bounds", "stiffness"}) {
    auto* sub = en->add_subcommand(op);
    auto* spec = sub->add_option("--spectrum", en_spectrum, "SpectrumSummary JSON");
    sub->add_option("--config", en_config, "config or payload JSON");
    auto* H = sub->add_option("--H", en_H, "H(mu) in nats");
    auto* h = sub->add_option("--h-rel", en_h, "relative entropy in nats");
    auto& en_ov = attach(sub);
    sub->callback([&, &en_ov = en_ov, op = std::string(op), spec, H, h] {
      action = [&, op, spec, H, h] {
        ExperimentConfig cfg = en_config.empty() ? ExperimentConfig{"entropy", {}, {}, {}, json::object()}
                                                 : from_document("entropy", en_config);
        cfg.payload["op"] = op;
        if (spec->count()) cfg.payload["spectrum"] = read_json(en_spectrum);
        if (H->count()) cfg.payload["H_mu"] = en_H;
        if (h->count()) cfg.payload["h_rel"] = en_h;
        en_ov.apply(cfg);
        return execute(cfg);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action ? action() : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return experiments::exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
