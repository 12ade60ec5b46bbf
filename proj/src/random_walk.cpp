#include "rigidlab/random_walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <numbers>

#include "rigidlab/errors.hpp"
#include "rigidlab/parallel.hpp"
#include "rigidlab/rng.hpp"

namespace rigidlab::walk {

using dynamics::Space;
using dynamics::SpaceKind;

namespace {

constexpr std::size_t kChunks = 64;

double neumaier_sum(std::span<const double> xs) {
  double sum = 0, comp = 0;
  for (double x : xs) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

void require_same_space(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (!(a.space == b.space)) throw SpaceMismatch("measures live on different spaces");
}

void require_walk_space(const WalkMeasure& mu, const EmpiricalMeasure& nu) {
  if (!(mu.space() == nu.space)) throw SpaceMismatch("walk and measure live on different spaces");
}

}  // namespace

double EmpiricalMeasure::total_weight() const { return neumaier_sum(weights); }

EmpiricalMeasure EmpiricalMeasure::dirac(Space space, std::span<const double> q) {
  if (q.size() != space.dim) throw SpaceMismatch("point has wrong dimension");
  return {space, {q.begin(), q.end()}, {1.0}};
}

EmpiricalMeasure EmpiricalMeasure::lebesgue_grid(Space space, std::size_t per_axis) {
  if (per_axis == 0) throw InvalidArgument("grid needs at least one point per axis");
  std::size_t total = 1;
  for (std::size_t i = 0; i < space.dim; ++i) total *= per_axis;
  EmpiricalMeasure nu{space, {}, std::vector<double>(total, 1.0 / static_cast<double>(total))};
  nu.points.reserve(total * space.dim);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = 0; i < space.dim; ++i) {
      nu.points.push_back(static_cast<double>(rest % per_axis) / static_cast<double>(per_axis));
      rest /= per_axis;
    }
  }
  return nu;
}

EmpiricalMeasure mix(const EmpiricalMeasure& nu1, double a, const EmpiricalMeasure& nu2, double b) {
  require_same_space(nu1, nu2);
  EmpiricalMeasure out{nu1.space, nu1.points, {}};
  out.points.insert(out.points.end(), nu2.points.begin(), nu2.points.end());
  out.weights.reserve(nu1.size() + nu2.size());
  for (double w : nu1.weights) out.weights.push_back(a * w);
  for (double w : nu2.weights) out.weights.push_back(b * w);
  return out;
}

EmpiricalMeasure empirical_measure(const WalkMeasure& mu, std::span<const double> q, std::size_t N, std::size_t M,
                                   std::uint64_t seed, const SimulationOptions& opt) {
  if (N == 0 || M == 0) throw InvalidArgument("empirical measure needs N >= 1 and M >= 1");
  if (opt.burn_in >= N) throw InvalidArgument("burn-in must be smaller than N");
  const Space space = mu.space();
  if (q.size() != space.dim) throw SpaceMismatch("start point has wrong dimension");
  const std::size_t kept = N - opt.burn_in, dim = space.dim;

  EmpiricalMeasure nu{space, std::vector<double>(kept * M * dim),
                      std::vector<double>(kept * M, 1.0 / (static_cast<double>(kept) * static_cast<double>(M)))};
  parallel_for(M, [&](std::size_t m) {
    Rng rng = Rng::stream(seed, m);
    std::vector<double> p(q.begin(), q.end());
    double* out = nu.points.data() + m * kept * dim;
    for (std::size_t n = 0; n < N; ++n) {
      if (n >= opt.burn_in) {
        std::copy(p.begin(), p.end(), out);
        out += dim;
      }
      if (n + 1 < N) mu.generator(mu.sample(rng)).apply(p, p);
    }
  });
  return nu;
}

EmpiricalMeasure push(const dynamics::SystemSpec& f, const EmpiricalMeasure& nu) {
  if (!(f.space() == nu.space)) throw SpaceMismatch("generator and measure live on different spaces");
  EmpiricalMeasure out{nu.space, std::vector<double>(nu.points.size()), nu.weights};
  const std::size_t dim = nu.space.dim;
  const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(1, nu.size()));
  parallel_for(chunks, [&](std::size_t c) {
    auto [b, e] = chunk_range(nu.size(), chunks, c);
    for (std::size_t i = b; i < e; ++i)
      f.apply(nu.point(i), std::span<double>(out.points.data() + i * dim, dim));
  });
  return out;
}

EmpiricalMeasure convolve_push(const WalkMeasure& mu, const EmpiricalMeasure& nu, ConvolveMode mode,
                               std::uint64_t seed, std::size_t size_budget) {
  require_walk_space(mu, nu);
  const std::size_t dim = nu.space.dim, n = nu.size(), k = mu.size();
  if (mode == ConvolveMode::Exact) {
    if (n > size_budget / k)
      throw BudgetExceeded("exact convolution would create " + std::to_string(n) + " x " + std::to_string(k) + " points");
    EmpiricalMeasure out{nu.space, std::vector<double>(n * k * dim), std::vector<double>(n * k)};
    const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(1, n));
    parallel_for(chunks, [&](std::size_t c) {
      auto [b, e] = chunk_range(n, chunks, c);
      for (std::size_t i = b; i < e; ++i)
        for (std::size_t a = 0; a < k; ++a) {
          const std::size_t slot = i * k + a;
          mu.generator(a).apply(nu.point(i), std::span<double>(out.points.data() + slot * dim, dim));
          out.weights[slot] = nu.weights[i] * mu.probability(a);
        }
    });
    return out;
  }

  EmpiricalMeasure out{nu.space, std::vector<double>(n * dim), nu.weights};
  const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(1, n));
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = Rng::stream(seed, c);
    auto [b, e] = chunk_range(n, chunks, c);
    for (std::size_t i = b; i < e; ++i)
      mu.generator(mu.sample(rng)).apply(nu.point(i), std::span<double>(out.points.data() + i * dim, dim));
  });
  return out;
}

std::string to_string(Metric m) { return m == Metric::KolmogorovSmirnov ? "KS" : "Weyl-Fourier"; }

Metric metric_for(const Space& s) {
  switch (s.kind) {
    case SpaceKind::Interval:
    case SpaceKind::Circle: return Metric::KolmogorovSmirnov;
    case SpaceKind::Torus: return Metric::WeylFourier;
    case SpaceKind::Euclidean: break;
  }
  throw InvalidArgument("no measure distance is defined on " + dynamics::to_string(s));
}

namespace {

// 1-dimensional measure sorted by coordinate.
struct Sorted1D {
  std::vector<double> x, w;
};

Sorted1D sort_1d(std::vector<double> x, std::vector<double> w) {
  if (!std::is_sorted(x.begin(), x.end())) {
    std::vector<std::pair<double, double>> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = {x[i], w[i]};
    std::sort(v.begin(), v.end(), [](const auto& p, const auto& q) { return p.first < q.first; });
    for (std::size_t i = 0; i < v.size(); ++i) std::tie(x[i], w[i]) = v[i];
  }
  return {std::move(x), std::move(w)};
}

// Pushforward of a sorted measure; monotone maps keep the order.
Sorted1D push_sorted(const dynamics::SystemSpec& f, const Sorted1D& s) {
  std::vector<double> x(s.x.size());
  const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(1, x.size()));
  parallel_for(chunks, [&](std::size_t c) {
    auto [b, e] = chunk_range(x.size(), chunks, c);
    for (std::size_t i = b; i < e; ++i) f.apply(std::span<const double>(&s.x[i], 1), std::span<double>(&x[i], 1));
  });
  return sort_1d(std::move(x), s.w);
}

// sup_x |sum_a c_a F_{parts[a]}(x) - F_b(x)| by a merge over sorted lists.
double ks_mixture(const std::vector<const Sorted1D*>& parts, const std::vector<double>& coef, const Sorted1D& b) {
  std::vector<std::size_t> idx(parts.size(), 0);
  std::size_t jb = 0;
  double fa = 0, fb = 0, best = 0;
  const double inf = std::numeric_limits<double>::infinity();
  for (;;) {
    double x = jb < b.x.size() ? b.x[jb] : inf;
    for (std::size_t a = 0; a < parts.size(); ++a)
      if (idx[a] < parts[a]->x.size()) x = std::min(x, parts[a]->x[idx[a]]);
    if (x == inf) return best;
    for (std::size_t a = 0; a < parts.size(); ++a) {
      const auto& p = *parts[a];
      while (idx[a] < p.x.size() && p.x[idx[a]] == x) fa += coef[a] * p.w[idx[a]++];
    }
    while (jb < b.x.size() && b.x[jb] == x) fb += b.w[jb++];
    best = std::max(best, std::abs(fa - fb));
  }
}

Sorted1D sorted_of(const EmpiricalMeasure& m) { return sort_1d(m.points, m.weights); }

}  // namespace

double ks_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  require_same_space(a, b);
  if (a.space.dim != 1) throw InvalidArgument("KS distance needs a 1-dimensional space");
  const Sorted1D sa = sorted_of(a), sb = sorted_of(b);
  return ks_mixture({&sa}, {1.0}, sb);
}

std::vector<std::vector<int>> weyl_frequencies(std::size_t dim, int K) {
  if (K < 1) throw InvalidArgument("need K >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> k(dim, -K);
  for (;;) {
    auto first = std::find_if(k.begin(), k.end(), [](int v) { return v != 0; });
    if (first != k.end() && *first > 0) out.push_back(k);
    std::size_t pos = dim;
    while (pos > 0) {
      --pos;
      if (++k[pos] <= K) break;
      k[pos] = -K;
      if (pos == 0) return out;
    }
    if (dim == 0) return out;
  }
}

std::vector<std::complex<double>> fourier_coefficients(const EmpiricalMeasure& nu, int K) {
  const std::size_t dim = nu.space.dim;
  const auto freqs = weyl_frequencies(dim, K);
  const std::size_t F = freqs.size(), n = nu.size();
  const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(1, n));
  std::vector<std::vector<std::complex<double>>> partial(chunks, std::vector<std::complex<double>>(F));
  const double two_pi = 2 * std::numbers::pi;

  parallel_for(chunks, [&](std::size_t c) {
    auto [b, e] = chunk_range(n, chunks, c);
    auto& acc = partial[c];
    if (dim == 1) {
      for (std::size_t i = b; i < e; ++i) {
        const double x = nu.points[i], w = nu.weights[i];
        for (std::size_t f = 0; f < F; ++f) {
          double t = freqs[f][0] * x;
          t -= std::floor(t);
          acc[f] += w * std::complex<double>(std::cos(two_pi * t), std::sin(two_pi * t));
        }
      }
      return;
    }
    // Per-coordinate tables e(k x_i) for k in [-K, K] by repeated products.
    const std::size_t width = 2 * static_cast<std::size_t>(K) + 1;
    std::vector<std::complex<double>> table(dim * width);
    for (std::size_t i = b; i < e; ++i) {
      const auto p = nu.point(i);
      for (std::size_t d = 0; d < dim; ++d) {
        double t = p[d] - std::floor(p[d]);
        const std::complex<double> base(std::cos(two_pi * t), std::sin(two_pi * t));
        std::complex<double>* row = table.data() + d * width + K;
        row[0] = 1.0;
        for (int k = 1; k <= K; ++k) {
          row[k] = row[k - 1] * base;
          row[-k] = std::conj(row[k]);
        }
      }
      const double w = nu.weights[i];
      for (std::size_t f = 0; f < F; ++f) {
        std::complex<double> z = w;
        for (std::size_t d = 0; d < dim; ++d) {
          const int k = freqs[f][d];
          if (k != 0) z *= table[d * width + static_cast<std::size_t>(k + K)];
        }
        acc[f] += z;
      }
    }
  });

  std::vector<std::complex<double>> out(F);
  for (const auto& p : partial)
    for (std::size_t f = 0; f < F; ++f) out[f] += p[f];
  return out;
}

std::vector<double> weyl_coefficients(const EmpiricalMeasure& nu, int K) {
  std::vector<double> out;
  for (const auto& z : fourier_coefficients(nu, K)) out.push_back(std::abs(z));
  return out;
}

double weyl_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int K) {
  require_same_space(a, b);
  const auto ca = fourier_coefficients(a, K), cb = fourier_coefficients(b, K);
  double best = 0;
  for (std::size_t f = 0; f < ca.size(); ++f) best = std::max(best, std::abs(ca[f] - cb[f]));
  return best;
}

double measure_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int K) {
  require_same_space(a, b);
  return metric_for(a.space) == Metric::KolmogorovSmirnov ? ks_distance(a, b) : weyl_distance(a, b, K);
}

namespace {

// Stationarity and invariance residuals sharing one pass of pushforwards:
// mu*nu is compared as the mixture sum_a p_a (f_a)_* nu.
ResidualReport residuals(const WalkMeasure& mu, const EmpiricalMeasure& nu, int K, bool stationarity,
                         bool invariance) {
  require_walk_space(mu, nu);
  if (nu.size() == 0) throw InvalidArgument("measure is empty");
  ResidualReport rep;
  rep.metric = metric_for(nu.space);
  rep.sample_size = nu.size();
  const std::size_t k = mu.size();

  if (rep.metric == Metric::KolmogorovSmirnov) {
    const Sorted1D base = sorted_of(nu);
    std::vector<Sorted1D> pushed;
    pushed.reserve(k);
    for (std::size_t a = 0; a < k; ++a) pushed.push_back(push_sorted(mu.generator(a), base));
    std::vector<const Sorted1D*> parts;
    for (const auto& p : pushed) parts.push_back(&p);
    if (stationarity) rep.stationarity = ks_mixture(parts, mu.probabilities(), base);
    if (invariance)
      for (std::size_t a = 0; a < k; ++a) rep.invariance.push_back(ks_mixture({parts[a]}, {1.0}, base));
    return rep;
  }

  const auto c_nu = fourier_coefficients(nu, K);
  std::vector<std::complex<double>> c_mix(c_nu.size());
  for (std::size_t a = 0; a < k; ++a) {
    const auto c_a = fourier_coefficients(push(mu.generator(a), nu), K);
    double worst = 0;
    for (std::size_t f = 0; f < c_a.size(); ++f) {
      c_mix[f] += mu.probability(a) * c_a[f];
      worst = std::max(worst, std::abs(c_a[f] - c_nu[f]));
    }
    if (invariance) rep.invariance.push_back(worst);
  }
  if (stationarity)
    for (std::size_t f = 0; f < c_nu.size(); ++f)
      rep.stationarity = std::max(rep.stationarity, std::abs(c_mix[f] - c_nu[f]));
  return rep;
}

}  // namespace

double stationarity_residual(const WalkMeasure& mu, const EmpiricalMeasure& nu, int K) {
  return residuals(mu, nu, K, true, false).stationarity;
}

std::vector<double> invariance_residual(const WalkMeasure& mu, const EmpiricalMeasure& nu, int K) {
  return residuals(mu, nu, K, false, true).invariance;
}

ResidualReport residual_report(const WalkMeasure& mu, const EmpiricalMeasure& nu, int K, std::uint64_t seed) {
  ResidualReport rep = residuals(mu, nu, K, true, true);
  rep.seed = seed;
  return rep;
}

BoxDimension box_dimension(const EmpiricalMeasure& nu, std::span<const double> scales) {
  if (nu.space.dim != 1) throw InvalidArgument("box dimension is implemented for 1-dimensional spaces");
  std::vector<double> distinct(scales.begin(), scales.end());
  for (double s : distinct)
    if (!(s > 0.0 && s <= 1.0)) throw InvalidArgument("scales must lie in (0, 1]");
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw DegenerateFit("need at least three distinct scales");

  std::vector<double> xs;
  for (std::size_t i = 0; i < nu.size(); ++i)
    if (nu.weights[i] > 0) xs.push_back(nu.points[i]);
  if (xs.empty()) throw DegenerateFit("measure has no mass");

  std::sort(xs.begin(), xs.end());
  BoxDimension out;
  constexpr double tol = 1e-9;  // in box widths
  std::vector<long long> interior, edges;
  for (double s : scales) {
    // Points on a box edge join an adjacent box that already holds interior
    // points, else the box above the edge.
    interior.clear();
    edges.clear();
    for (double x : xs) {
      const double t = x / s;
      const double j = std::floor(t), frac = t - j;
      const auto box = static_cast<long long>(j);
      if (frac < tol) edges.push_back(box);
      else if (frac > 1.0 - tol) edges.push_back(box + 1);
      else if (interior.empty() || interior.back() != box) interior.push_back(box);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::size_t count = interior.size();
    for (long long e : edges)
      if (!std::binary_search(interior.begin(), interior.end(), e) &&
          !std::binary_search(interior.begin(), interior.end(), e - 1))
        ++count;
    out.scales.push_back(s);
    out.counts.push_back(count);
  }

  const double m = static_cast<double>(out.scales.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < out.scales.size(); ++i) {
    const double x = -std::log(out.scales[i]), y = std::log(static_cast<double>(out.counts[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return out;
}

RelativeEntropyEstimate relative_entropy_estimate(const WalkMeasure& mu, const EmpiricalMeasure& nu,
                                                  std::size_t bins_per_axis) {
  require_walk_space(mu, nu);
  if (nu.space.kind == SpaceKind::Euclidean) throw InvalidArgument("binning needs a compact space");
  if (bins_per_axis == 0) throw InvalidArgument("need at least one bin per axis");
  const std::size_t dim = nu.space.dim, k = mu.size();
  std::size_t cells = 1;
  for (std::size_t d = 0; d < dim; ++d) cells *= bins_per_axis;

  auto cell_of = [&](std::span<const double> p) {
    std::size_t c = 0;
    for (std::size_t d = dim; d-- > 0;) {
      auto b = static_cast<std::size_t>(std::floor(p[d] * static_cast<double>(bins_per_axis)));
      c = c * bins_per_axis + std::min(b, bins_per_axis - 1);
    }
    return c;
  };

  // mass[a][c] = p_a * (f_a)_* nu (cell c)
  std::vector<std::vector<double>> mass(k, std::vector<double>(cells, 0.0));
  for (std::size_t a = 0; a < k; ++a) {
    const auto pushed = push(mu.generator(a), nu);
    for (std::size_t i = 0; i < pushed.size(); ++i) mass[a][cell_of(pushed.point(i))] += pushed.weights[i];
    for (double& v : mass[a]) v *= mu.probability(a);
  }

  RelativeEntropyEstimate est;
  est.cells = cells;
  for (std::size_t a = 0; a < k; ++a) {
    const double p = mu.probability(a);
    est.H_mu -= p * std::log(p);
  }
  for (std::size_t c = 0; c < cells; ++c) {
    double total = 0;
    for (std::size_t a = 0; a < k; ++a) total += mass[a][c];
    if (total <= 0) continue;
    double h = 0;
    for (std::size_t a = 0; a < k; ++a) {
      const double post = mass[a][c] / total;
      if (post > 0) h -= post * std::log(post);
    }
    est.h_rel += total * h;
  }
  est.gap = est.H_mu - est.h_rel;
  return est;
}

}  // namespace rigidlab::walk
