// One PASS/FAIL line per acceptance criterion. Expected values come from
// oracles computed here (eigenvalues, brute-force word sums, closed-form
// Weyl sums, the Cantor function), not from the library under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rigidlab/config.hpp"
#include "rigidlab/entropy.hpp"
#include "rigidlab/errors.hpp"
#include "rigidlab/experiments.hpp"
#include "rigidlab/expansion.hpp"
#include "rigidlab/lyapunov.hpp"
#include "rigidlab/random_walk.hpp"
#include "rigidlab/subresonant.hpp"
#include "rigidlab/subresonant_io.hpp"

using namespace rigidlab;
using dynamics::IntMat;
using dynamics::Mat;
using dynamics::SystemSpec;
using walk::WalkMeasure;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %d. %s -- %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

IntMat int2(long long a, long long b, long long c, long long d) {
  IntMat m(2, 2);
  m << a, b, c, d;
  return m;
}

// log of the spectral radius from the characteristic polynomial of a 2x2
// integer matrix.
double log_spectral_radius(const IntMat& m) {
  const double tr = static_cast<double>(m(0, 0) + m(1, 1));
  const double det = static_cast<double>(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
  const double disc = tr * tr - 4 * det;
  return std::log(std::max(std::abs((tr + std::sqrt(disc)) / 2), std::abs((tr - std::sqrt(disc)) / 2)));
}

// sum over all words of p(word) log |M_word v| for unit v and constant
// Jacobians, by explicit enumeration.
double brute_sigma(const std::vector<Mat>& gens, const std::vector<double>& probs, std::size_t N,
                   const Eigen::VectorXd& v) {
  const std::size_t k = gens.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < N; ++i) total *= k;
  double acc = 0;
  for (std::size_t w = 0; w < total; ++w) {
    Eigen::VectorXd x = v;
    double p = 1;
    std::size_t rest = w;
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t g = rest % k;
      rest /= k;
      x = gens[g] * x;
      p *= probs[g];
    }
    acc += p * std::log(x.norm() / v.norm());
  }
  return acc;
}

double cantor_cdf(double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  double f = 0, scale = 0.5;
  for (int i = 0; i < 60; ++i) {
    x *= 3;
    if (x < 1) {
    } else if (x < 2) {
      return f + scale;
    } else {
      f += scale;
      x -= 2;
    }
    scale /= 2;
  }
  return f;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  std::printf("rigidlab acceptance\n");

  report(1, "Cat-map Lyapunov spectrum", [] {
    Outcome o;
    const IntMat a = int2(2, 1, 1, 1);
    const double oracle = log_spectral_radius(a);
    config::ExperimentConfig cfg;
    cfg.kind = "lyapunov";
    cfg.seed = 1;
    cfg.payload = {{"walk", config::to_json(SystemSpec::toral(a))}, {"start", {0.1, 0.2}}, {"n", 10000}};
    const auto t0 = Clock::now();
    const auto rep = dynamics::lyapunov_qr(WalkMeasure::dirac(SystemSpec::toral(a)), std::vector<double>{0.1, 0.2},
                                           10000, 1);
    const auto run = experiments::run(cfg);
    const double elapsed = seconds_since(t0);
    o.check(std::abs(rep.exponents[0] - oracle) <= 1e-3,
            "lambda_1 = " + fmt(rep.exponents[0], 9) + " vs log((3+sqrt5)/2) = " + fmt(oracle, 9));
    o.check(std::abs(rep.exponents[0] + rep.exponents[1]) <= 1e-9,
            "|lambda_1 + lambda_2| = " + fmt(std::abs(rep.exponents[0] + rep.exponents[1]), 3));
    o.check(run.files.at(0).content.find(experiments::format_double(rep.exponents[0])) != std::string::npos,
            "CLI payload carries the same lambda_1");
    o.check(elapsed < 1.0, "runtime " + fmt(elapsed, 3) + " s < 1 s");
    return o;
  });

  report(2, "Subresonant algebra suite (10^3 random maps)", [] {
    Outcome o;
    using namespace subres;
    const std::vector<std::vector<Rational>> weight_sets = {
        {Rational(2), Rational(1)}, {Rational(3), Rational(2), Rational(1)}, {Rational(5, 2), Rational(1)}};
    std::mt19937_64 rng(20240617);
    std::size_t closure = 0, roundtrip = 0, hom = 0, hom_origin = 0, strict_conj = 0;
    const std::size_t trials = 1000;
    const auto t0 = Clock::now();
    for (std::size_t t = 0; t < trials; ++t) {
      std::vector<FilteredSpace::Level> levels;
      for (const auto& w : weight_sets[t % weight_sets.size()]) levels.push_back({w, 1});
      const FilteredSpace space(levels);
      const auto f = random_map(space, rng, false);
      const auto g = random_map(space, rng, false);

      const auto fg = compose(f, g);
      const auto fg_check = validate(fg.map());  // closure: stays in the group
      if (fg_check == fg) ++closure;

      const auto id = identity(space);
      const auto finv = invert(f);
      if (compose(f, finv) == id && compose(finv, f) == id) ++roundtrip;

      if (linearize(fg, true).entries == linearize(f, true).entries * linearize(g, true).entries) ++hom;

      const auto f0 = random_map(space, rng, false, 0.5, false);
      const auto g0 = random_map(space, rng, false, 0.5, false);
      if (linearize(compose(f0, g0)).entries == linearize(f0).entries * linearize(g0).entries) ++hom_origin;

      const auto s = random_map(space, rng, true);
      const auto c = conjugate(g, s);
      if (s.strict() && c.strict() && validate(c.map(), true) == c) ++strict_conj;
    }
    const double elapsed = seconds_since(t0);
    o.check(closure == trials, "closure under composition " + std::to_string(closure) + "/1000");
    o.check(roundtrip == trials, "invert round trip " + std::to_string(roundtrip) + "/1000");
    o.check(hom == trials, "L(FG) = L(F)L(G), affine " + std::to_string(hom) + "/1000");
    o.check(hom_origin == trials, "L(FG) = L(F)L(G), origin-fixing " + std::to_string(hom_origin) + "/1000");
    o.check(strict_conj == trials, "strictness under conjugation " + std::to_string(strict_conj) + "/1000");
    o.check(elapsed < 10.0, "runtime " + fmt(elapsed, 3) + " s < 10 s");
    return o;
  });

  report(3, "Normal-form example (3x + y + 2y^2, 2y)", [] {
    Outcome o;
    using namespace subres;
    const FilteredSpace space({{Rational(2), 1}, {Rational(1), 1}});
    PolynomialMap m(space);
    MultiIndex x = MultiIndex::unit(2, 0), y = MultiIndex::unit(2, 1);
    m.add(0, x, Rational(3));
    m.add(0, y, Rational(1));
    m.add(0, y + y, Rational(2));
    m.add(1, y, Rational(2));
    const auto f = validate(m);
    o.check(!f.strict(), "validated, strict=false");

    // [[mu^2, 0, 0], [0, mu, 0], [c_2, c_1, lambda]] with lambda = 3, mu = 2,
    // c_1 = 1, c_2 = 2 on the basis (y^2, y, x).
    const auto lin = linearize(f);
    RationalMatrix expected(3, 3);
    const int vals[3][3] = {{4, 0, 0}, {0, 2, 0}, {2, 1, 3}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) expected.at(i, j) = vals[i][j];
    o.check(lin.basis == std::vector<MultiIndex>{y + y, y, x}, "basis (y^2, y, x)");
    o.check(lin.entries == expected, "matrix [[4,0,0],[0,2,0],[2,1,3]]");

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> num(-50, 50), den(1, 17);
    std::size_t ok = 0;
    for (int t = 0; t < 100; ++t) {
      std::vector<Rational> q = {Rational(num(rng), den(rng)), Rational(num(rng), den(rng))};
      for (auto& r : q) r.canonicalize();
      if (embed(space, act(f, q)) == lin.entries * embed(space, q)) ++ok;
    }
    o.check(ok == 100, "embed(F q) = L embed(q) exactly on " + std::to_string(ok) + "/100 rational points");
    return o;
  });

  report(4, "Expansion: Monte Carlo vs exhaustive, {A, A^-1}, N = 8", [] {
    Outcome o;
    const IntMat a = int2(2, 1, 1, 1);
    const auto A = SystemSpec::toral(a);
    const auto mu = WalkMeasure::uniform({A, A.inverse()});
    std::vector<Mat> gens = {A.jacobian(std::vector<double>{0, 0}), A.inverse().jacobian(std::vector<double>{0, 0})};
    const auto t0 = Clock::now();
    std::size_t within = 0;
    double worst_z = 0, weight_err = 0, exact_vs_brute = 0;
    for (int k = 0; k < 20; ++k) {
      const double theta = std::numbers::pi * k / 20.0;
      const auto plane = expansion::PlaneSpec::from_angle({0.0, 0.0}, theta);
      expansion::SigmaOptions ex;
      const auto exact = expansion::sigma(mu, 8, plane, ex);
      expansion::SigmaOptions mc;
      mc.mode = expansion::Mode::MonteCarlo;
      mc.samples = 10000;
      mc.seed = 1;
      const auto est = expansion::sigma(mu, 8, plane, mc);
      Eigen::VectorXd v(2);
      v << std::cos(theta), std::sin(theta);
      const double brute = brute_sigma(gens, {0.5, 0.5}, 8, v);
      exact_vs_brute = std::max(exact_vs_brute, std::abs(exact.value - brute));
      weight_err = std::max(weight_err, std::abs(exact.weight_total - 1.0));
      const double z = std::abs(est.value - brute) / est.std_error;
      worst_z = std::max(worst_z, z);
      if (z <= 3.0) ++within;
    }
    const double elapsed = seconds_since(t0);
    o.check(within == 20, std::to_string(within) + "/20 directions within 3 stderr (max " + fmt(worst_z, 3) + ")");
    o.check(weight_err <= 1e-12, "exact weights sum to 1 within " + fmt(weight_err, 3));
    o.check(exact_vs_brute <= 1e-12, "exact mode vs brute-force enumeration " + fmt(exact_vs_brute, 3));
    o.check(elapsed < 5.0, "runtime " + fmt(elapsed, 3) + " s < 5 s");
    return o;
  });

  report(5, "Uniform-expansion certificate, 720 directions", [] {
    Outcome o;
    const auto A = SystemSpec::toral(int2(2, 1, 1, 1));
    const auto B = SystemSpec::toral(int2(1, 1, 1, 2));
    const auto mu = WalkMeasure::uniform({A, B});
    const auto grid = expansion::angular_grid({}, 720);
    const auto rep = expansion::uniform_expansion_scan(mu, 8, 1, grid);
    std::vector<Mat> gens = {A.jacobian(std::vector<double>{0, 0}), B.jacobian(std::vector<double>{0, 0})};
    double worst = 0, oracle_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const Eigen::VectorXd v = grid.bases[i].col(0);
      const double oracle = brute_sigma(gens, {0.5, 0.5}, 8, v);
      oracle_min = std::min(oracle_min, oracle);
      worst = std::max(worst, std::abs(rep.rows[i].sigma - oracle));
    }
    o.check(rep.rows.size() == 720, std::to_string(rep.rows.size()) + " directions");
    o.check(rep.min_value > 0 && rep.certificate, "sampled min sigma = " + fmt(rep.min_value, 9) + " > 0");
    o.check(worst <= 1e-12, "per-direction deviation from the exhaustive oracle " + fmt(worst, 3));
    o.check(std::abs(rep.min_value - oracle_min) <= 1e-12, "minimum matches the oracle minimum");

    auto rot = [](double t) {
      Mat m(2, 2);
      m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      return SystemSpec::linear(m);
    };
    const auto nu = WalkMeasure::uniform({rot(1.0), rot(std::sqrt(2.0))});
    const auto neg = expansion::uniform_expansion_scan(nu, 8, 1, grid);
    o.check(std::abs(neg.min_value) <= 1e-12 && !neg.certificate,
            "rotation pair min = " + fmt(neg.min_value, 3) + " (no certificate)");
    return o;
  });

  report(6, "Cantor IFS walk, N = 10^5, M = 64", [] {
    Outcome o;
    const auto f1 = SystemSpec::affine(Rational(1, 3), Rational(0));
    const auto f2 = SystemSpec::affine(Rational(1, 3), Rational(2, 3));
    const auto mu = WalkMeasure::uniform({f1, f2});
    const auto t0 = Clock::now();
    const auto nu = walk::empirical_measure(mu, std::vector<double>{0.0}, 100000, 64, 7);
    const auto rep = walk::residual_report(mu, nu);
    const std::vector<double> scales = {1.0 / 27, 1.0 / 81, 1.0 / 243, 1.0 / 729, 1.0 / 2187};
    const auto dim = walk::box_dimension(nu, scales);
    const double elapsed = seconds_since(t0);

    std::vector<std::pair<double, double>> pts(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) pts[i] = {nu.points[i], nu.weights[i]};
    std::sort(pts.begin(), pts.end());
    double cdf = 0, ks_oracle = 0;
    for (std::size_t i = 0; i < pts.size();) {
      const double x = pts[i].first, c = cantor_cdf(x);
      ks_oracle = std::max(ks_oracle, std::abs(cdf - c));
      while (i < pts.size() && pts[i].first == x) cdf += pts[i++].second;
      ks_oracle = std::max(ks_oracle, std::abs(cdf - c));
    }
    const double target = std::log(2.0) / std::log(3.0);
    o.check(rep.stationarity < 0.02, "stationarity residual " + fmt(rep.stationarity, 4) + " < 0.02");
    o.check(ks_oracle < 0.02, "KS to the Cantor function " + fmt(ks_oracle, 4) + " < 0.02");
    o.check(rep.invariance[0] >= 0.4 && rep.invariance[0] <= 0.55,
            "invariance under x/3 = " + fmt(rep.invariance[0], 4) + " in [0.4, 0.55]");
    o.check(std::abs(dim.slope - target) <= 0.05, "box dimension " + fmt(dim.slope, 5) + " vs " + fmt(target, 5));
    o.check(elapsed < 10.0, "runtime " + fmt(elapsed, 3) + " s < 10 s");
    return o;
  });

  report(7, "Weyl equidistribution of the golden rotation", [] {
    Outcome o;
    const double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
    const auto mu = WalkMeasure::dirac(SystemSpec::rotation(alpha));
    const std::size_t N = 100000;
    const auto nu = walk::empirical_measure(mu, std::vector<double>{0.0}, N, 1, 1);
    const auto c = walk::weyl_coefficients(nu, 10);
    double worst = 0, dev = 0;
    for (int k = 1; k <= 10; ++k) {
      // |sum_{n<N} e(k n alpha)| / N = |sin(pi k N alpha) / (N sin(pi k alpha))|
      const double closed = std::abs(std::sin(std::numbers::pi * k * alpha * static_cast<double>(N)) /
                                     (static_cast<double>(N) * std::sin(std::numbers::pi * k * alpha)));
      worst = std::max(worst, c[k - 1]);
      dev = std::max(dev, std::abs(c[k - 1] - closed));
    }
    o.check(worst < 0.01, "max_{k<=10} |c_k| = " + fmt(worst, 4) + " < 0.01");
    o.check(dev < 1e-6, "agrees with the closed-form Weyl sum to " + fmt(dev, 3));

    const auto dirac = walk::EmpiricalMeasure::dirac({dynamics::SpaceKind::Circle, 1}, std::vector<double>{0.3});
    const auto cd = walk::weyl_coefficients(dirac, 10);
    double off = 0;
    for (double v : cd) off = std::max(off, std::abs(v - 1.0));
    o.check(off <= 1e-12, "Dirac control: all |c_k| = 1 (max deviation " + fmt(off, 3) + ")");
    return o;
  });

  report(8, "Entropy calculators", [] {
    Outcome o;
    const double lam = log_spectral_radius(int2(2, 1, 1, 1));
    entropy::SpectrumSummary s{{lam, -lam}, {1, 1}, std::vector<unsigned>{1, 0}, std::vector<unsigned>{1, 0}};
    const auto eq = entropy::ly_bounds(s);
    o.check(eq.lower == eq.upper, "E1 = E2 gives lower = upper = " + fmt(eq.lower, 9));

    const auto A = SystemSpec::toral(int2(2, 1, 1, 1));
    const auto measured = dynamics::lyapunov_qr(WalkMeasure::dirac(A), std::vector<double>{0.1, 0.2}, 10000, 1);
    const double pesin = entropy::pesin_sum(s);
    o.check(std::abs(pesin - measured.exponents[0]) <= 1e-3,
            "Pesin sum " + fmt(pesin, 7) + " vs measured lambda_1 " + fmt(measured.exponents[0], 7));

    // Cat-map walk {A, A^-1}: volume is invariant, so the binned relative
    // entropy gap and the invariance residual should both shrink with N.
    const auto mu = WalkMeasure::uniform({A, A.inverse()});
    const double H = entropy::shannon_entropy(mu);
    const entropy::SpectrumSummary z{{lam, -lam}, {1, 1}, std::nullopt, std::nullopt};
    const std::vector<std::size_t> Ns = {1000, 10000, 100000};
    const int seeds = 4;
    std::vector<double> gap_mean, gap_se, inv_mean, inv_se;
    bool bound_ok = true, signs_agree = true;
    for (std::size_t N : Ns) {
      std::vector<double> gaps, invs;
      for (int sd = 1; sd <= seeds; ++sd) {
        const auto nu = walk::empirical_measure(mu, std::vector<double>{0.1234, 0.5678}, N, 8, sd);
        const auto est = walk::relative_entropy_estimate(mu, nu, 8);
        const auto inv = walk::invariance_residual(mu, nu, 4);
        const auto check = entropy::relative_entropy_bound_check(H, est.h_rel);
        const auto chain = entropy::stiffness_chain(H, z, est.h_rel);
        bound_ok = bound_ok && check.consistent;
        signs_agree = signs_agree && (check.gap >= -1e-12) == chain.consistent;
        gaps.push_back(check.gap);
        invs.push_back(*std::max_element(inv.begin(), inv.end()));
      }
      auto stats = [&](const std::vector<double>& v, std::vector<double>& mean, std::vector<double>& se) {
        double m = 0, var = 0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        for (double x : v) var += (x - m) * (x - m);
        var /= static_cast<double>(v.size() - 1);
        mean.push_back(m);
        se.push_back(std::sqrt(var / static_cast<double>(v.size())));
      };
      stats(gaps, gap_mean, gap_se);
      stats(invs, inv_mean, inv_se);
    }
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < Ns.size(); ++i) {
      monotone = monotone && gap_mean[i + 1] <= gap_mean[i] + 2 * (gap_se[i] + gap_se[i + 1]);
      monotone = monotone && inv_mean[i + 1] <= inv_mean[i] + 2 * (inv_se[i] + inv_se[i + 1]);
    }
    std::string trail;
    for (std::size_t i = 0; i < Ns.size(); ++i)
      trail += (i ? ", " : "") + std::string("N=") + std::to_string(Ns[i]) + ": gap " + fmt(gap_mean[i], 3) +
               " inv " + fmt(inv_mean[i], 3);
    o.check(bound_ok, "h_rel <= H(mu) in every run");
    o.check(monotone, "gap and invariance residual monotone within 2 SE (" + trail + ")");
    o.check(gap_mean.back() < gap_mean.front() && inv_mean.back() < inv_mean.front(), "both decrease overall");
    o.check(gap_mean.back() < 1e-3, "gap at N=10^5 below 1e-3");
    o.check(signs_agree, "bound check and stiffness chain agree on the sign");
    return o;
  });

  report(9, "Determinism across thread counts", [] {
    Outcome o;
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / ("rigidlab-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    std::size_t compared = 0, identical = 0;
    for (const auto& f : config::fixtures()) {
      std::vector<std::string> payloads;
      for (const char* threads : {"1", "8", "8"}) {
        const fs::path out = root / (f.name + "-" + threads + "-" + std::to_string(payloads.size()));
        const std::string cmd = std::string("RIGIDLAB_THREADS=") + threads + " '" + RIGIDLAB_CLI +
                                "' fixtures --run " + f.name + " --out '" + out.string() + "' > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
          o.check(false, f.name + " exited nonzero");
          break;
        }
        std::string all;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(out))
          if (e.path().filename() != "run.meta.json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files) all += p.filename().string() + "\n" + read_file(p);
        payloads.push_back(all);
      }
      if (payloads.size() != 3) continue;
      ++compared;
      if (payloads[0] == payloads[1] && payloads[1] == payloads[2] && !payloads[0].empty()) ++identical;
    }
    fs::remove_all(root);
    o.check(compared >= 5, std::to_string(compared) + " fixtures run");
    o.check(identical == compared,
            std::to_string(identical) + "/" + std::to_string(compared) + " byte-identical (threads 1, 8, 8)");
    return o;
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
