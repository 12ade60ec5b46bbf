#include "rigidlab/experiments.hpp"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rigidlab/entropy.hpp"
#include "rigidlab/errors.hpp"
#include "rigidlab/expansion.hpp"
#include "rigidlab/lyapunov.hpp"
#include "rigidlab/subresonant_io.hpp"

namespace rigidlab::experiments {

using config::ExperimentConfig;
using config::get_bool;
using config::get_double;
using config::get_string;
using config::get_uint;
using config::get_vector;
using config::json;
using config::require;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int exit_code(const Error& e) {
  if (dynamic_cast<const SchemaError*>(&e)) return 2;
  if (dynamic_cast<const BudgetExceeded*>(&e)) return 3;
  return 1;
}

namespace {

std::string provenance(const ExperimentConfig& cfg) {
  std::string line = "# rigidlab " RIGIDLAB_VERSION " experiment=" + cfg.kind;
  if (cfg.seed) line += " seed=" + std::to_string(*cfg.seed);
  return line + " config=" + config::hex64(cfg.hash()) + "\n";
}

class Csv {
 public:
  Csv(const ExperimentConfig& cfg, const std::string& header) : out_(provenance(cfg) + header + "\n") {}
  template <class... Cells>
  void row(const Cells&... cells) {
    std::size_t i = 0;
    ((out_ += (i++ ? "," : "") + cell(cells)), ...);
    out_ += "\n";
  }
  std::string str() const { return out_; }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  std::string out_;
};

std::string join_doubles(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s + "]";
}

void require_budget(std::uint64_t used, std::uint64_t budget, const std::string& what) {
  if (used > budget)
    throw BudgetExceeded(what + " " + std::to_string(used) + " exceeds the budget of " + std::to_string(budget));
}

std::vector<double> start_point(const json& p, const walk::WalkMeasure& mu) {
  const auto& space = mu.space();
  const double fallback = space.kind == dynamics::SpaceKind::Interval ? 0.5 : 0.0;
  auto q = get_vector(p, "start", "payload", std::vector<double>(space.dim, fallback));
  if (q.size() != space.dim) throw SchemaError("field 'payload.start': expected " + std::to_string(space.dim) + " coordinates");
  return q;
}

std::string op_of(const json& p, const std::string& fallback) { return get_string(p, "op", "payload", fallback); }

// subres ---------------------------------------------------------------

subres::SubresonantMap load_map(const json& p, const std::string& key, bool strict) {
  try {
    return subres::validate(subres::map_from_json(require(p, key, "payload")), strict);
  } catch (const SchemaError& e) {
    throw SchemaError("field 'payload." + key + "': " + e.detail());
  }
}

RunResult run_subres(const ExperimentConfig& cfg) {
  const json& p = cfg.payload;
  const std::string op = op_of(p, "check");
  const bool strict = get_bool(p, "strict", "payload", false);
  RunResult r;
  if (op == "check") {
    auto f = load_map(p, "map", strict);
    r.summary = std::string("validated, strict=") + (f.strict() ? "true" : "false");
    json doc = {{"validated", true}, {"strict", f.strict()}, {"dim", f.space().dim()}, {"terms", f.map().num_terms()}};
    r.files.push_back({"check.json", doc.dump(2) + "\n"});
  } else if (op == "compose" || op == "invert" || op == "conjugate") {
    auto f = load_map(p, "map", false);
    subres::SubresonantMap out = f;
    if (op == "compose") out = subres::compose(f, load_map(p, "map2", false));
    else if (op == "invert") out = subres::invert(f);
    else out = subres::conjugate(load_map(p, "map2", false), f);
    r.summary = op + ": " + std::to_string(out.map().num_terms()) + " terms, strict=" + (out.strict() ? "true" : "false");
    r.files.push_back({"map.json", subres::to_json(out.map()).dump(2) + "\n"});
  } else if (op == "linearize") {
    auto f = load_map(p, "map", false);
    const auto lin = subres::linearize(f, get_bool(p, "affine", "payload", false));
    std::string header = "row";
    for (const auto& a : lin.basis) header += "," + subres::to_string(a);
    Csv csv(cfg, header);
    for (std::size_t i = 0; i < lin.entries.rows; ++i) {
      std::string line = subres::to_string(lin.basis[i]);
      for (std::size_t j = 0; j < lin.entries.cols; ++j) line += "," + rigidlab::to_string(lin.entries.at(i, j));
      csv.row(line);
    }
    r.summary = "linearization of size " + std::to_string(lin.basis.size());
    r.files.push_back({"linearization.csv", csv.str()});
    r.files.push_back({"linearization.json", subres::to_json(lin).dump(2) + "\n"});
  } else if (op == "fibered") {
    const auto c = [&] {
      try {
        return subres::fibered_from_json(require(p, "cocycle", "payload"));
      } catch (const SchemaError& e) {
        throw SchemaError("field 'payload.cocycle': " + e.detail());
      }
    }();
    const bool ok = subres::validate_fibered(c);
    r.summary = std::string("fibered cocycle admissible=") + (ok ? "true" : "false");
    r.files.push_back({"fibered.json", json{{"admissible", ok}}.dump(2) + "\n"});
  } else {
    throw SchemaError("field 'payload.op': unknown subres operation '" + op + "'");
  }
  return r;
}

// lyapunov -------------------------------------------------------------

RunResult run_lyapunov(const ExperimentConfig& cfg) {
  const json& p = cfg.payload;
  const auto mu = config::walk_from_json(require(p, "walk", "payload"), "payload.walk");
  const auto q = start_point(p, mu);
  const std::uint64_t n = get_uint(p, "n", "payload");
  std::vector<std::uint64_t> seeds;
  if (p.contains("seeds")) {
    for (double s : get_vector(p, "seeds", "payload")) seeds.push_back(static_cast<std::uint64_t>(s));
  } else {
    seeds.push_back(*cfg.seed);
  }
  require_budget(n * seeds.size(), cfg.budgets.samples, "total step count");

  const auto reports = dynamics::lyapunov_batch(mu, q, n, seeds);
  const std::size_t d = mu.space().dim;
  std::string header = "seed,n";
  for (std::size_t i = 1; i <= d; ++i) header += ",lambda_" + std::to_string(i);
  header += ",residual";
  Csv csv(cfg, header);
  RunResult r;
  for (const auto& rep : reports) {
    std::string line = std::to_string(rep.seed) + "," + std::to_string(rep.n_steps);
    for (double l : rep.exponents) line += "," + format_double(l);
    csv.row(line + "," + format_double(rep.residual));
  }
  r.summary = "lambda = " + join_doubles(reports.front().exponents) + " (seed " + std::to_string(reports.front().seed) + ")";
  r.files.push_back({"lyapunov.csv", csv.str()});
  return r;
}

// expansion ------------------------------------------------------------

std::vector<std::vector<double>> base_points(const json& grid) {
  std::vector<std::vector<double>> out;
  if (!grid.contains("base_points")) return out;
  const json& bp = grid.at("base_points");
  if (!bp.is_array()) throw SchemaError("field 'payload.grid.base_points': expected an array of points");
  for (const auto& pt : bp) {
    if (!pt.is_array()) throw SchemaError("field 'payload.grid.base_points': expected an array of points");
    std::vector<double> v;
    for (const auto& x : pt) v.push_back(x.get<double>());
    out.push_back(std::move(v));
  }
  return out;
}

RunResult run_expansion(const ExperimentConfig& cfg) {
  const json& p = cfg.payload;
  const std::string op = op_of(p, "scan");
  if (op != "scan" && op != "gaps") throw SchemaError("field 'payload.op': unknown expansion operation '" + op + "'");
  const auto mu = config::walk_from_json(require(p, "walk", "payload"), "payload.walk");
  const std::size_t N = get_uint(p, "N", "payload");
  const std::size_t d = get_uint(p, "d", "payload", 1);
  const std::string mode = get_string(p, "mode", "payload", "exact");
  if (mode != "exact" && mode != "mc") throw SchemaError("field 'payload.mode': expected exact or mc");

  expansion::ScanOptions opt;
  opt.margin = get_double(p, "margin", "payload", 0.0);
  opt.sigma.mode = mode == "exact" ? expansion::Mode::Exact : expansion::Mode::MonteCarlo;
  opt.sigma.samples = get_uint(p, "samples", "payload", 10000);
  opt.sigma.seed = cfg.seed.value_or(1);
  opt.sigma.word_budget = cfg.budgets.words;
  if (opt.sigma.mode == expansion::Mode::MonteCarlo) require_budget(opt.sigma.samples, cfg.budgets.samples, "sample count");

  const json grid_doc = p.value("grid", json::object());
  const std::string type = get_string(grid_doc, "type", "payload.grid", op == "gaps" ? "flag" : "angular");
  const std::size_t count = get_uint(grid_doc, "count", "payload.grid", 180);
  const std::size_t dim = mu.space().dim;
  expansion::PlaneGrid grid;
  if (type == "angular") grid = expansion::angular_grid(base_points(grid_doc), count);
  else if (type == "flag") grid = expansion::angular_flag_grid(base_points(grid_doc), count);
  else if (type == "random")
    grid = expansion::random_grid(base_points(grid_doc), dim, op == "gaps" ? d + 1 : d, count, cfg.seed.value_or(1));
  else throw SchemaError("field 'payload.grid.type': expected angular, flag or random");

  expansion::ExpansionReport rep;
  if (op == "scan") {
    rep = expansion::uniform_expansion_scan(mu, N, d, grid, opt);
  } else {
    const auto delta = static_cast<int>(get_double(p, "delta", "payload", 1));
    rep = expansion::uniform_gaps_scan(mu, N, d, delta, grid, opt);
  }

  Csv rows(cfg, "plane_id,label,sigma,stderr");
  for (const auto& row : rep.rows) rows.row(row.plane_id, row.label, row.sigma, row.std_error);
  Csv summary(cfg, "quantity,value");
  summary.row("kind", rep.kind);
  summary.row("N", rep.N);
  summary.row("d", rep.d);
  summary.row("delta", rep.delta);
  summary.row("mode", expansion::to_string(rep.mode));
  summary.row("min", rep.min_value);
  summary.row("argmin", rep.argmin);
  summary.row("margin", rep.margin);
  summary.row("certificate", rep.certificate);
  summary.row("rigorous", rep.rigorous);
  summary.row("lipschitz", rep.lipschitz);
  summary.row("weight_total", rep.weight_total);
  summary.row("note", rep.note);

  RunResult r;
  r.summary = rep.kind + " min = " + format_double(rep.min_value) + " at plane " + std::to_string(rep.argmin) +
              ", certificate=" + (rep.certificate ? "true" : "false") + (rep.note.empty() ? "" : " (" + rep.note + ")");
  r.files.push_back({"expansion.csv", rows.str()});
  r.files.push_back({"expansion_summary.csv", summary.str()});
  return r;
}

// walk -----------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_walk(const ExperimentConfig& cfg) {
  const json& p = cfg.payload;
  const std::string op = op_of(p, "simulate");
  if (op != "simulate" && op != "residuals" && op != "dimension")
    throw SchemaError("field 'payload.op': unknown walk operation '" + op + "'");
  const auto mu = config::walk_from_json(require(p, "walk", "payload"), "payload.walk");

  walk::EmpiricalMeasure nu;
  std::size_t N = 0, M = 0;
  if (p.contains("measure")) {
    nu = read_measure_csv(read_file(get_string(p, "measure", "payload")), mu.space());
  } else {
    const auto q = start_point(p, mu);
    N = get_uint(p, "N", "payload");
    M = get_uint(p, "M", "payload", 1);
    require_budget(static_cast<std::uint64_t>(N) * M, cfg.budgets.samples, "sample count N*M");
    walk::SimulationOptions sim;
    sim.burn_in = get_uint(p, "burn_in", "payload", 0);
    nu = walk::empirical_measure(mu, q, N, M, *cfg.seed, sim);
  }

  RunResult r;
  if (op == "simulate") {
    r.summary = "empirical measure with " + std::to_string(nu.size()) + " points";
    r.files.push_back({"measure.csv", provenance(cfg) + measure_csv(nu)});
    return r;
  }

  Csv csv(cfg, "quantity,index,value");
  std::string summary;
  if (op == "residuals") {
    const int K = static_cast<int>(get_uint(p, "K", "payload", 20));
    const auto rep = walk::residual_report(mu, nu, K, cfg.seed.value_or(0));
    csv.row("metric", "", walk::to_string(rep.metric));
    csv.row("sample_size", "", rep.sample_size);
    csv.row("stationarity", "", rep.stationarity);
    for (std::size_t i = 0; i < rep.invariance.size(); ++i) csv.row("invariance", i, rep.invariance[i]);
    summary = "stationarity = " + format_double(rep.stationarity) + ", invariance = " + join_doubles(rep.invariance) +
              " (" + walk::to_string(rep.metric) + ")";
    if (p.contains("weyl_K")) {
      const int wk = static_cast<int>(get_uint(p, "weyl_K", "payload"));
      const auto coeffs = walk::weyl_coefficients(nu, wk);
      const auto freqs = walk::weyl_frequencies(nu.space.dim, wk);
      double worst = 0;
      for (std::size_t i = 0; i < coeffs.size(); ++i) {
        std::string label;
        for (std::size_t j = 0; j < freqs[i].size(); ++j) label += (j ? " " : "") + std::to_string(freqs[i][j]);
        csv.row("weyl", label, coeffs[i]);
        worst = std::max(worst, coeffs[i]);
      }
      summary += ", max |c_k| = " + format_double(worst);
    }
    if (p.contains("bins")) {
      const auto est = walk::relative_entropy_estimate(mu, nu, get_uint(p, "bins", "payload"));
      csv.row("H_mu", "", est.H_mu);
      csv.row("h_rel", "", est.h_rel);
      csv.row("entropy_gap", "", est.gap);
      summary += ", entropy gap = " + format_double(est.gap);
    }
  }
  if (op == "dimension" || p.contains("scales")) {
    const auto scales = get_vector(p, "scales", "payload");
    const auto dim = walk::box_dimension(nu, scales);
    for (std::size_t i = 0; i < dim.scales.size(); ++i) csv.row("box_count", format_double(dim.scales[i]), dim.counts[i]);
    csv.row("box_dimension", "", dim.slope);
    summary += std::string(summary.empty() ? "" : ", ") + "box dimension = " + format_double(dim.slope);
  }
  r.summary = summary;
  r.files.push_back({op == "dimension" ? "dimension.csv" : "residuals.csv", csv.str()});
  return r;
}

// entropy --------------------------------------------------------------

RunResult run_entropy(const ExperimentConfig& cfg) {
  const json& p = cfg.payload;
  const std::string op = op_of(p, "bounds");
  const auto spec = config::spectrum_from_json(require(p, "spectrum", "payload"), "payload.spectrum");
  std::optional<double> H;
  if (p.contains("H_mu")) H = get_double(p, "H_mu", "payload");
  else if (p.contains("walk")) H = entropy::shannon_entropy(config::walk_from_json(p.at("walk"), "payload.walk"));
  std::optional<double> h_rel;
  if (p.contains("h_rel")) h_rel = get_double(p, "h_rel", "payload");

  Csv csv(cfg, "quantity,value");
  RunResult r;
  if (op == "bounds") {
    const double pesin = entropy::pesin_sum(spec);
    csv.row("pesin_sum", pesin);
    r.summary = "pesin sum = " + format_double(pesin);
    if (spec.dims_e1 && spec.dims_e2) {
      const auto b = entropy::ly_bounds(spec);
      csv.row("ly_lower", b.lower);
      csv.row("ly_upper", b.upper);
      r.summary += ", LY bounds = [" + format_double(b.lower) + ", " + format_double(b.upper) + "]";
    }
    if (H) csv.row("H_mu", *H);
    if (H && h_rel) {
      const auto c = entropy::relative_entropy_bound_check(*H, *h_rel);
      csv.row("h_rel", *h_rel);
      csv.row("relative_gap", c.gap);
      csv.row("relative_consistent", c.consistent);
      csv.row("invariance_consistent", c.invariance_consistent);
      r.summary += ", relative gap = " + format_double(c.gap);
    }
  } else if (op == "stiffness") {
    if (!H) throw SchemaError("field 'payload.H_mu': missing (give H_mu or walk)");
    const auto v = entropy::stiffness_chain(*H, spec, h_rel);
    csv.row("H_mu", *H);
    csv.row("signed_sum", v.signed_sum);
    csv.row("positive_part", v.positive_part);
    csv.row("negative_part", v.negative_part);
    csv.row("consistent", v.consistent);
    for (const auto& step : v.chain) csv.row("slack: " + step.inequality, step.slack);
    r.summary = std::string(v.consistent ? "stiffness-consistent" : "stiffness-inconsistent") +
                ", signed sum = " + format_double(v.signed_sum);
  } else {
    throw SchemaError("field 'payload.op': unknown entropy operation '" + op + "'");
  }
  r.files.push_back({"entropy.csv", csv.str()});
  return r;
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  if (cfg.kind == "subres") return run_subres(cfg);
  if (cfg.kind == "lyapunov") return run_lyapunov(cfg);
  if (cfg.kind == "expansion") return run_expansion(cfg);
  if (cfg.kind == "walk") return run_walk(cfg);
  if (cfg.kind == "entropy") return run_entropy(cfg);
  throw SchemaError("field 'experiment': unknown experiment kind '" + cfg.kind + "'");
}

void write_outputs(const ExperimentConfig& cfg, const RunResult& result, double wall_seconds) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output);
  fs::create_directories(dir);

  json meta = {{"experiment", cfg.kind},
               {"config_hash", config::hex64(cfg.hash())},
               {"version", RIGIDLAB_VERSION},
               {"wall_seconds", wall_seconds},
               {"files", json::array()}};
  if (cfg.seed) meta["seed"] = *cfg.seed;

  std::vector<Artifact> all = result.files;
  for (const auto& a : result.files) meta["files"].push_back(a.name);
  all.push_back({"run.meta.json", meta.dump(2) + "\n"});

  const std::string suffix = ".tmp" + std::to_string(::getpid());
  std::vector<fs::path> staged;
  try {
    for (const auto& a : all) {
      fs::path tmp = dir / (a.name + suffix);
      std::ofstream out(tmp, std::ios::binary);
      out << a.content;
      out.close();
      staged.push_back(tmp);
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
  } catch (...) {
    for (const auto& t : staged) fs::remove(t);
    throw;
  }
  for (std::size_t i = 0; i < all.size(); ++i) fs::rename(staged[i], dir / all[i].name);
}

std::string measure_csv(const walk::EmpiricalMeasure& nu) {
  std::string out;
  for (std::size_t i = 0; i < nu.space.dim; ++i) out += "x" + std::to_string(i) + ",";
  out += "weight\n";
  char buf[32];
  for (std::size_t j = 0; j < nu.size(); ++j) {
    for (double x : nu.point(j)) {
      std::snprintf(buf, sizeof buf, "%.17g,", x);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", nu.weights[j]);
    out += buf;
  }
  return out;
}

walk::EmpiricalMeasure read_measure_csv(const std::string& text, const dynamics::Space& space) {
  walk::EmpiricalMeasure nu{space, {}, {}};
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      try {
        std::size_t used = 0;
        const std::string cell = line.substr(pos, comma - pos);
        cells.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw SchemaError("measure line " + std::to_string(lineno) + ": expected numbers");
      }
      pos = comma + 1;
    }
    if (cells.size() != space.dim + 1)
      throw SchemaError("measure line " + std::to_string(lineno) + ": expected " + std::to_string(space.dim + 1) +
                        " columns");
    nu.points.insert(nu.points.end(), cells.begin(), cells.end() - 1);
    nu.weights.push_back(cells.back());
  }
  return nu;
}

}  // namespace rigidlab::experiments
