#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rigidlab/config.hpp"
#include "rigidlab/entropy.hpp"
#include "rigidlab/errors.hpp"
#include "rigidlab/experiments.hpp"
#include "rigidlab/expansion.hpp"
#include "rigidlab/lyapunov.hpp"
#include "rigidlab/random_walk.hpp"
#include "rigidlab/subresonant_io.hpp"

namespace py = pybind11;
using namespace rigidlab;
using config::json;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
}

subres::SubresonantMap load_map(const std::string& text, bool strict = false) {
  return subres::validate(subres::map_from_json(parse(text)), strict);
}

walk::WalkMeasure load_walk(const std::string& text) { return config::walk_from_json(parse(text)); }

py::dict measure_dict(const walk::EmpiricalMeasure& nu) {
  py::dict d;
  d["dim"] = nu.space.dim;
  d["points"] = nu.points;
  d["weights"] = nu.weights;
  return d;
}

}  // namespace

PYBIND11_MODULE(_rigidlab, m) {
  m.doc() = "Native core of rigidlab";
  m.attr("__version__") = RIGIDLAB_VERSION;

  static py::exception<Error> error(m, "RigidlabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  // Subresonant algebra; maps travel as JSON strings.
  m.def("validate_map", [](const std::string& map, bool strict) {
    auto f = load_map(map, strict);
    py::dict d;
    d["strict"] = f.strict();
    d["terms"] = f.map().num_terms();
    return d;
  }, py::arg("map"), py::arg("strict") = false);
  m.def("compose", [](const std::string& f, const std::string& g) {
    return subres::to_json(subres::compose(load_map(f), load_map(g)).map()).dump();
  });
  m.def("invert", [](const std::string& f) { return subres::to_json(subres::invert(load_map(f)).map()).dump(); });
  m.def("conjugate", [](const std::string& g, const std::string& f) {
    return subres::to_json(subres::conjugate(load_map(g), load_map(f)).map()).dump();
  });
  m.def("linearize", [](const std::string& f, bool affine) {
    return subres::to_json(subres::linearize(load_map(f), affine)).dump();
  }, py::arg("map"), py::arg("affine") = false);

  // Dynamics.
  m.def("lyapunov", [](const std::string& walk, std::vector<double> start, std::size_t n, std::uint64_t seed) {
    auto mu = load_walk(walk);
    py::gil_scoped_release release;
    auto rep = dynamics::lyapunov_qr(mu, start, n, seed);
    return std::make_pair(rep.exponents, rep.residual);
  }, py::arg("walk"), py::arg("start"), py::arg("n"), py::arg("seed") = 1);

  m.def("sigma", [](const std::string& walk, std::size_t N, std::vector<std::vector<double>> vectors,
                    std::vector<double> base_point, const std::string& mode, std::size_t samples, std::uint64_t seed) {
    auto mu = load_walk(walk);
    if (vectors.empty()) throw InvalidArgument("need at least one spanning vector");
    dynamics::Mat span(static_cast<long>(vectors.front().size()), static_cast<long>(vectors.size()));
    for (std::size_t c = 0; c < vectors.size(); ++c) {
      if (vectors[c].size() != vectors.front().size()) throw InvalidArgument("spanning vectors differ in length");
      for (std::size_t r = 0; r < vectors[c].size(); ++r) span(static_cast<long>(r), static_cast<long>(c)) = vectors[c][r];
    }
    if (base_point.empty()) base_point.assign(mu.space().dim, 0.0);
    auto plane = expansion::PlaneSpec::from_vectors(base_point, span);
    expansion::SigmaOptions opt;
    if (mode == "mc") opt.mode = expansion::Mode::MonteCarlo;
    else if (mode != "exact") throw InvalidArgument("mode must be exact or mc");
    opt.samples = samples;
    opt.seed = seed;
    auto est = expansion::sigma(mu, N, plane, opt);
    return std::make_pair(est.value, est.std_error);
  }, py::arg("walk"), py::arg("N"), py::arg("vectors"), py::arg("base_point") = std::vector<double>{},
     py::arg("mode") = "exact", py::arg("samples") = 10000, py::arg("seed") = 1);

  // Random walks.
  m.def("empirical_measure", [](const std::string& walk, std::vector<double> start, std::size_t N, std::size_t M,
                                std::uint64_t seed, std::size_t burn_in) {
    auto mu = load_walk(walk);
    walk::EmpiricalMeasure nu;
    {
      py::gil_scoped_release release;
      nu = walk::empirical_measure(mu, start, N, M, seed, {burn_in});
    }
    return measure_dict(nu);
  }, py::arg("walk"), py::arg("start"), py::arg("N"), py::arg("M") = 1, py::arg("seed") = 1, py::arg("burn_in") = 0);

  m.def("residuals", [](const std::string& walk, std::vector<double> start, std::size_t N, std::size_t M,
                        std::uint64_t seed, int K) {
    auto mu = load_walk(walk);
    walk::ResidualReport rep;
    {
      py::gil_scoped_release release;
      auto nu = walk::empirical_measure(mu, start, N, M, seed);
      rep = walk::residual_report(mu, nu, K, seed);
    }
    py::dict d;
    d["stationarity"] = rep.stationarity;
    d["invariance"] = rep.invariance;
    d["metric"] = walk::to_string(rep.metric);
    d["sample_size"] = rep.sample_size;
    return d;
  }, py::arg("walk"), py::arg("start"), py::arg("N"), py::arg("M") = 1, py::arg("seed") = 1, py::arg("K") = 20);

  m.def("weyl_coefficients", [](const std::string& walk, std::vector<double> start, std::size_t N, std::size_t M,
                                std::uint64_t seed, int K) {
    auto mu = load_walk(walk);
    py::gil_scoped_release release;
    return walk::weyl_coefficients(walk::empirical_measure(mu, start, N, M, seed), K);
  }, py::arg("walk"), py::arg("start"), py::arg("N"), py::arg("M") = 1, py::arg("seed") = 1, py::arg("K") = 10);

  // Entropy.
  m.def("shannon_entropy", [](const std::vector<double>& p) { return entropy::shannon_entropy(p); });
  m.def("pesin_sum", [](const std::string& spec) { return entropy::pesin_sum(config::spectrum_from_json(parse(spec))); });
  m.def("ly_bounds", [](const std::string& spec) {
    auto b = entropy::ly_bounds(config::spectrum_from_json(parse(spec)));
    return std::make_pair(b.lower, b.upper);
  });
  m.def("relative_entropy_bound_check", [](double H, double h) {
    auto c = entropy::relative_entropy_bound_check(H, h);
    py::dict d;
    d["consistent"] = c.consistent;
    d["gap"] = c.gap;
    d["invariance_consistent"] = c.invariance_consistent;
    return d;
  });
  m.def("stiffness_chain", [](double H, const std::string& spec, std::optional<double> h_rel) {
    auto v = entropy::stiffness_chain(H, config::spectrum_from_json(parse(spec)), h_rel);
    py::dict d;
    d["signed_sum"] = v.signed_sum;
    d["consistent"] = v.consistent;
    py::list chain;
    for (const auto& s : v.chain) chain.append(py::make_tuple(s.inequality, s.lhs, s.rhs, s.slack));
    d["chain"] = chain;
    return d;
  }, py::arg("H_mu"), py::arg("spectrum"), py::arg("h_rel") = py::none());

  // Experiments.
  m.def("run_experiment", [](const std::string& cfg_text) {
    auto cfg = config::parse_config(cfg_text);
    experiments::RunResult r;
    {
      py::gil_scoped_release release;
      r = experiments::run(cfg);
    }
    py::dict files;
    for (const auto& f : r.files) files[py::str(f.name)] = f.content;
    py::dict d;
    d["summary"] = r.summary;
    d["files"] = files;
    return d;
  });
  m.def("fixtures", [] {
    py::list out;
    for (const auto& f : config::fixtures()) {
      py::dict d;
      d["name"] = f.name;
      d["description"] = f.description;
      d["target"] = f.target;
      d["config"] = f.config.to_json().dump();
      out.append(d);
    }
    return out;
  });
}
