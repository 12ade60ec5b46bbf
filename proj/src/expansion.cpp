#include "rigidlab/expansion.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "rigidlab/errors.hpp"
#include "rigidlab/parallel.hpp"
#include "rigidlab/rng.hpp"

namespace rigidlab::expansion {

namespace {

constexpr std::size_t kChunks = 64;
// Round-off floor below which a sampled minimum counts as zero.
constexpr double kCertificateTolerance = 1e-12;

double log_volume(const Mat& v) {
  Eigen::HouseholderQR<Mat> qr(v);
  const Mat& r = qr.matrixQR();
  double acc = 0;
  for (long i = 0; i < v.cols(); ++i) {
    const double rii = std::abs(r(i, i));
    if (rii == 0.0 || !std::isfinite(rii)) throw NonInvertibleJacobian("plane collapsed under the word");
    acc += std::log(rii);
  }
  return acc;
}

void next_subset(std::vector<std::size_t>& idx, std::size_t n) {
  std::size_t k = idx.size();
  std::size_t i = k;
  while (i-- > 0) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return;
    }
  }
  idx.clear();
}

}  // namespace

Vec plucker_vector(const Mat& spanning) {
  const auto n = static_cast<std::size_t>(spanning.rows());
  const auto d = static_cast<std::size_t>(spanning.cols());
  std::vector<double> coords;
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = i;
  while (!idx.empty()) {
    Mat minor(d, d);
    for (std::size_t r = 0; r < d; ++r) minor.row(static_cast<long>(r)) = spanning.row(static_cast<long>(idx[r]));
    coords.push_back(minor.determinant());
    next_subset(idx, n);
  }
  return Eigen::Map<Vec>(coords.data(), static_cast<long>(coords.size()));
}

PlaneSpec PlaneSpec::from_vectors(std::vector<double> base_point, const Mat& spanning) {
  const long n = spanning.rows(), d = spanning.cols();
  if (d < 1 || d > n) throw InvalidArgument("plane dimension must be between 1 and the ambient dimension");
  Eigen::HouseholderQR<Mat> qr(spanning);
  const Mat& r = qr.matrixQR();
  const double scale = spanning.norm();
  for (long i = 0; i < d; ++i)
    if (std::abs(r(i, i)) <= 1e-12 * scale) throw InvalidArgument("spanning vectors are linearly dependent");
  PlaneSpec p;
  p.base_point = std::move(base_point);
  p.basis = qr.householderQ() * Mat::Identity(n, d);
  p.plucker = plucker_vector(p.basis);
  return p;
}

PlaneSpec PlaneSpec::from_angle(std::vector<double> base_point, double theta) {
  Mat v(2, 1);
  v << std::cos(theta), std::sin(theta);
  PlaneSpec p;
  p.base_point = std::move(base_point);
  p.basis = v;
  p.plucker = plucker_vector(v);
  return p;
}

double log_expansion(const Mat& jacobian, const Mat& spanning) {
  return log_volume(jacobian * spanning) - log_volume(spanning);
}

std::string to_string(Mode m) { return m == Mode::Exact ? "exact" : "mc"; }

namespace {

// Products J_word along the orbit of q for all |supp mu|^N words, in
// lexicographic order of generator indices, stored row-major per word.
struct WordTable {
  std::size_t dim = 0;
  std::vector<double> probability;
  std::vector<double> products;

  Mat product(std::size_t w) const {
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        products.data() + w * dim * dim, static_cast<long>(dim), static_cast<long>(dim));
  }
};

std::size_t word_count(std::size_t k, std::size_t N, std::size_t budget) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < N; ++i) {
    if (total > budget / k) throw BudgetExceeded(std::to_string(k) + "^" + std::to_string(N) + " words exceed the budget of " + std::to_string(budget));
    total *= k;
  }
  return total;
}

WordTable build_word_table(const walk::WalkMeasure& mu, std::size_t N, std::span<const double> q,
                           std::size_t budget) {
  const std::size_t k = mu.size(), dim = mu.space().dim;
  const std::size_t total = word_count(k, N, budget);
  WordTable t;
  t.dim = dim;
  t.probability.resize(total);
  t.products.resize(total * dim * dim);

  // Depth-first with prefix reuse: word index w has digits g_1 ... g_N in
  // base k, most significant first.
  struct Frame {
    std::vector<double> point;
    Mat product;
    double probability;
  };
  std::vector<Frame> stack(N + 1);
  stack[0] = {{q.begin(), q.end()}, Mat::Identity(dim, dim), 1.0};
  std::vector<std::size_t> digits(N, 0);
  std::size_t depth = 0;
  for (std::size_t w = 0; w < total; ++w) {
    for (; depth < N; ++depth) {
      const auto& sys = mu.generator(digits[depth]);
      const Frame& cur = stack[depth];
      Frame& nxt = stack[depth + 1];
      nxt.product = sys.jacobian(cur.point) * cur.product;
      nxt.point = sys.apply(cur.point);
      nxt.probability = cur.probability * mu.probability(digits[depth]);
    }
    t.probability[w] = stack[N].probability;
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        t.products.data() + w * dim * dim, static_cast<long>(dim), static_cast<long>(dim)) = stack[N].product;
    // Advance the base-k counter and rewind to the first changed digit.
    std::size_t pos = N;
    while (pos > 0) {
      --pos;
      if (++digits[pos] < k) break;
      digits[pos] = 0;
    }
    depth = pos;
  }
  return t;
}

using WordFunctional = std::function<double(const Mat&)>;

SigmaEstimate exact_from_table(const WordTable& t, const WordFunctional& fn) {
  const std::size_t total = t.probability.size();
  const std::size_t chunks = std::min(kChunks, total);
  std::vector<double> partial(chunks, 0.0), weight(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    auto [b, e] = chunk_range(total, chunks, c);
    for (std::size_t w = b; w < e; ++w) {
      partial[c] += t.probability[w] * fn(t.product(w));
      weight[c] += t.probability[w];
    }
  });
  SigmaEstimate est;
  for (std::size_t c = 0; c < chunks; ++c) {
    est.value += partial[c];
    est.weight_total += weight[c];
  }
  est.count = total;
  return est;
}

SigmaEstimate monte_carlo(const walk::WalkMeasure& mu, std::size_t N, std::span<const double> q,
                          std::size_t samples, std::uint64_t seed, const WordFunctional& fn) {
  if (samples < 2) throw InvalidArgument("Monte Carlo mode needs at least 2 samples");
  const std::size_t dim = mu.space().dim;
  const std::size_t chunks = std::min(kChunks, samples);
  std::vector<double> sum(chunks, 0.0), sumsq(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = Rng::stream(seed, c);
    auto [b, e] = chunk_range(samples, chunks, c);
    std::vector<double> p(q.size());
    for (std::size_t s = b; s < e; ++s) {
      p.assign(q.begin(), q.end());
      Mat m = Mat::Identity(dim, dim);
      for (std::size_t step = 0; step < N; ++step) {
        const auto& sys = mu.generator(mu.sample(rng));
        m = sys.jacobian(p) * m;
        sys.apply(p, p);
      }
      const double v = fn(m);
      sum[c] += v;
      sumsq[c] += v * v;
    }
  });
  double s = 0, ss = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s += sum[c];
    ss += sumsq[c];
  }
  const double n = static_cast<double>(samples);
  SigmaEstimate est;
  est.value = s / n;
  const double var = std::max(0.0, (ss - n * est.value * est.value) / (n - 1));
  est.std_error = std::sqrt(var / n);
  est.count = samples;
  est.weight_total = 1.0;
  return est;
}

void check_plane(const walk::WalkMeasure& mu, const PlaneSpec& plane) {
  if (plane.dim() != mu.space().dim) throw SpaceMismatch("plane lives in the wrong tangent space");
  if (plane.base_point.size() != mu.space().dim) throw SpaceMismatch("plane base point has wrong dimension");
}

std::uint64_t plane_seed(std::uint64_t seed, std::size_t plane_id) { return seed ^ splitmix64(plane_id + 1); }

}  // namespace

SigmaEstimate sigma(const walk::WalkMeasure& mu, std::size_t N, const PlaneSpec& plane, const SigmaOptions& opt) {
  if (N == 0) throw InvalidArgument("N must be at least 1");
  check_plane(mu, plane);
  WordFunctional fn = [&](const Mat& m) { return log_expansion(m, plane.basis); };
  if (opt.mode == Mode::Exact) return exact_from_table(build_word_table(mu, N, plane.base_point, opt.word_budget), fn);
  return monte_carlo(mu, N, plane.base_point, opt.samples, opt.seed, fn);
}

PlaneGrid angular_grid(std::vector<std::vector<double>> base_points, std::size_t count) {
  if (count == 0) throw InvalidArgument("angular grid needs at least one direction");
  PlaneGrid g;
  g.base_points = std::move(base_points);
  g.angular_spacing = std::numbers::pi / static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double theta = g.angular_spacing * static_cast<double>(k);
    Mat v(2, 1);
    v << std::cos(theta), std::sin(theta);
    g.bases.push_back(v);
    std::ostringstream label;
    label.precision(17);
    label << theta;
    g.labels.push_back(label.str());
  }
  return g;
}

PlaneGrid angular_flag_grid(std::vector<std::vector<double>> base_points, std::size_t count) {
  PlaneGrid g = angular_grid(std::move(base_points), count);
  for (auto& b : g.bases) {
    Mat f(2, 2);
    f << b(0, 0), -b(1, 0), b(1, 0), b(0, 0);
    b = f;
  }
  return g;
}

PlaneGrid random_grid(std::vector<std::vector<double>> base_points, std::size_t dim, std::size_t columns,
                      std::size_t count, std::uint64_t seed) {
  if (columns < 1 || columns > dim) throw InvalidArgument("frame size must be between 1 and dim");
  PlaneGrid g;
  g.base_points = std::move(base_points);
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    Mat gauss(dim, columns);
    for (long c = 0; c < gauss.cols(); ++c)
      for (long r = 0; r < gauss.rows(); ++r) gauss(r, c) = rng.normal();
    Eigen::HouseholderQR<Mat> qr(gauss);
    g.bases.push_back(qr.householderQ() * Mat::Identity(dim, columns));
    g.labels.push_back("random-" + std::to_string(k));
  }
  return g;
}

double angular_lipschitz_bound(const walk::WalkMeasure& mu, std::size_t N, std::size_t word_budget) {
  if (!mu.constant_jacobian()) throw InvalidArgument("Lipschitz bound needs constant Jacobians");
  std::vector<double> origin(mu.space().dim, 0.0);
  if (mu.space().kind == dynamics::SpaceKind::Interval) origin.assign(1, 0.5);
  WordTable t = build_word_table(mu, N, origin, word_budget);
  return exact_from_table(t, [](const Mat& m) {
           Eigen::JacobiSVD<Mat> svd(m);
           const auto& s = svd.singularValues();
           return s(0) / s(s.size() - 1);
         }).value;
}

namespace {

std::string describe(const Mat& b) {
  std::ostringstream out;
  out.precision(17);
  for (long c = 0; c < b.cols(); ++c) {
    if (c) out << '|';
    for (long r = 0; r < b.rows(); ++r) out << (r ? " " : "") << b(r, c);
  }
  return out.str();
}

// Evaluates fn(product) for every plane of the grid; base points are
// collapsed to the first one when all Jacobians are constant.
ExpansionReport scan(const walk::WalkMeasure& mu, std::size_t N, const PlaneGrid& grid, const ScanOptions& opt,
                     const std::function<double(const Mat& product, const Mat& frame)>& fn) {
  if (N == 0) throw InvalidArgument("N must be at least 1");
  if (grid.bases.empty()) throw InvalidArgument("plane grid is empty");
  const std::size_t dim = mu.space().dim;
  std::vector<std::vector<double>> points = grid.base_points;
  if (points.empty()) points.push_back(std::vector<double>(dim, mu.space().kind == dynamics::SpaceKind::Interval ? 0.5 : 0.0));
  if (mu.constant_jacobian()) points.resize(1);
  for (const auto& p : points)
    if (p.size() != dim) throw SpaceMismatch("grid base point has wrong dimension");
  for (const auto& b : grid.bases)
    if (static_cast<std::size_t>(b.rows()) != dim) throw SpaceMismatch("grid frame lives in the wrong dimension");

  ExpansionReport rep;
  rep.N = N;
  rep.mode = opt.sigma.mode;
  rep.margin = opt.margin;
  rep.min_value = std::numeric_limits<double>::infinity();
  std::size_t plane_id = 0;
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    std::optional<WordTable> table;
    if (opt.sigma.mode == Mode::Exact) table = build_word_table(mu, N, points[pi], opt.sigma.word_budget);
    for (std::size_t bi = 0; bi < grid.bases.size(); ++bi, ++plane_id) {
      const Mat& frame = grid.bases[bi];
      WordFunctional f = [&](const Mat& m) { return fn(m, frame); };
      SigmaEstimate est = table ? exact_from_table(*table, f)
                                : monte_carlo(mu, N, points[pi], opt.sigma.samples,
                                              plane_seed(opt.sigma.seed, plane_id), f);
      if (plane_id == 0) rep.weight_total = est.weight_total;
      std::string label = bi < grid.labels.size() ? grid.labels[bi] : describe(frame);
      if (points.size() > 1) label = "q" + std::to_string(pi) + ":" + label;
      rep.rows.push_back({plane_id, label, est.value, est.std_error});
      if (est.value < rep.min_value) {
        rep.min_value = est.value;
        rep.argmin = plane_id;
      }
    }
  }
  rep.certificate = rep.min_value > rep.margin + kCertificateTolerance;
  if (mu.constant_jacobian()) {
    rep.note = "constant Jacobians: base points irrelevant; sampled minimum over directions";
  } else {
    rep.note = "nonlinear generators: sampled check over base points and planes, not a proof";
  }
  return rep;
}

}  // namespace

ExpansionReport uniform_expansion_scan(const walk::WalkMeasure& mu, std::size_t N, std::size_t d,
                                       const PlaneGrid& grid, const ScanOptions& opt) {
  const std::size_t dim = mu.space().dim;
  if (d < 1 || d >= dim) throw InvalidArgument("plane dimension must be in 1..dim-1");
  for (const auto& b : grid.bases)
    if (static_cast<std::size_t>(b.cols()) < d) throw InvalidArgument("grid frames have fewer than d columns");
  ExpansionReport rep = scan(mu, N, grid, opt, [d](const Mat& m, const Mat& frame) {
    return log_expansion(m, frame.leftCols(static_cast<long>(d)));
  });
  rep.kind = "expansion";
  rep.d = d;
  if (mu.constant_jacobian() && dim == 2 && d == 1 && grid.angular_spacing > 0 && opt.sigma.mode == Mode::Exact) {
    rep.lipschitz = angular_lipschitz_bound(mu, N, opt.sigma.word_budget);
    const double worst = rep.min_value - rep.lipschitz * grid.angular_spacing / 2;
    rep.rigorous = rep.certificate && worst > rep.margin;
    std::ostringstream note;
    note.precision(6);
    note << rep.note << "; Lipschitz bound " << rep.lipschitz << " per radian gives worst case " << worst
         << (rep.rigorous ? " (rigorous)" : " (grid too coarse for a rigorous certificate)");
    rep.note = note.str();
  }
  return rep;
}

ExpansionReport uniform_gaps_scan(const walk::WalkMeasure& mu, std::size_t N, std::size_t d, int delta,
                                  const PlaneGrid& grid, const ScanOptions& opt) {
  const std::size_t dim = mu.space().dim;
  if (delta != 1 && delta != -1) throw InvalidArgument("delta must be +1 or -1");
  if (d < 1 || d + 1 > dim) throw InvalidArgument("nested pair needs 1 <= d and d+1 <= dim");
  for (const auto& b : grid.bases)
    if (static_cast<std::size_t>(b.cols()) < d + 1) throw InvalidArgument("grid frames need d+1 columns for nested pairs");
  ExpansionReport rep = scan(mu, N, grid, opt, [d, delta](const Mat& m, const Mat& frame) {
    const double s1 = log_expansion(m, frame.leftCols(static_cast<long>(d + 1)));
    const double s0 = log_expansion(m, frame.leftCols(static_cast<long>(d)));
    return delta * (s1 - s0);
  });
  rep.kind = "gaps";
  rep.d = d;
  rep.delta = delta;
  return rep;
}

}  // namespace rigidlab::expansion
