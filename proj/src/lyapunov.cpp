#include "rigidlab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rigidlab/errors.hpp"
#include "rigidlab/parallel.hpp"

namespace rigidlab::dynamics {

std::vector<std::size_t> sample_word(const walk::WalkMeasure& mu, std::size_t n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0);
  std::vector<std::size_t> word(n);
  for (auto& w : word) w = mu.sample(rng);
  return word;
}

TangentCocycle tangent_cocycle(const walk::WalkMeasure& mu, std::span<const std::size_t> word,
                               std::span<const double> q) {
  const std::size_t d = mu.space().dim;
  TangentCocycle c{{word.begin(), word.end()}, {q.begin(), q.end()}, Mat::Identity(d, d)};
  std::vector<double> p(q.begin(), q.end());
  for (std::size_t g : word) {
    const auto& sys = mu.generator(g);
    c.product = sys.jacobian(p) * c.product;
    sys.apply(p, p);
  }
  return c;
}

namespace {

// Q <- qr(J Q), returning log|R_ii|.
Vec qr_step(const Mat& jac, Mat& frame) {
  Mat z = jac * frame;
  Eigen::HouseholderQR<Mat> qr(z);
  Mat q = qr.householderQ() * Mat::Identity(z.rows(), z.cols());
  const Mat& r = qr.matrixQR();
  Vec logs(z.cols());
  for (long i = 0; i < z.cols(); ++i) {
    const double rii = r(i, i);
    if (rii == 0.0 || !std::isfinite(rii)) throw NonInvertibleJacobian("degenerate tangent frame along the orbit");
    logs[i] = std::log(std::abs(rii));
    if (rii < 0) q.col(i) = -q.col(i);
  }
  frame = std::move(q);
  return logs;
}

double log_abs_det(const Mat& j) {
  const double det = j.determinant();
  if (det == 0.0 || !std::isfinite(det)) throw NonInvertibleJacobian("Jacobian determinant vanishes");
  return std::log(std::abs(det));
}

void check_start(const walk::WalkMeasure& mu, std::span<const double> q0, std::size_t n) {
  if (n == 0) throw InvalidArgument("need at least one step");
  if (q0.size() != mu.space().dim) throw SpaceMismatch("start point has wrong dimension");
}

}  // namespace

LyapunovReport lyapunov_qr(const walk::WalkMeasure& mu, std::span<const double> q0, std::size_t n,
                           std::uint64_t seed) {
  check_start(mu, q0, n);
  const std::size_t d = mu.space().dim;
  const auto word = sample_word(mu, n, seed);

  std::vector<double> q(q0.begin(), q0.end());
  Mat frame = Mat::Identity(d, d);
  Vec sums = Vec::Zero(d);
  double logdet = 0.0;
  for (std::size_t g : word) {
    const auto& sys = mu.generator(g);
    Mat jac = sys.jacobian(q);
    logdet += log_abs_det(jac);
    sums += qr_step(jac, frame);
    sys.apply(q, q);
  }

  LyapunovReport rep;
  rep.n_steps = n;
  rep.seed = seed;
  rep.exponents.resize(d);
  double total = 0;
  for (std::size_t i = 0; i < d; ++i) {
    rep.exponents[i] = sums[i] / static_cast<double>(n);
    total += sums[i];
  }
  rep.residual = std::abs(total - logdet) / static_cast<double>(n);
  std::sort(rep.exponents.begin(), rep.exponents.end(), std::greater<>());
  return rep;
}

std::vector<LyapunovReport> lyapunov_batch(const walk::WalkMeasure& mu, std::span<const double> q0, std::size_t n,
                                           std::span<const std::uint64_t> seeds) {
  std::vector<std::uint64_t> order(seeds.begin(), seeds.end());
  std::sort(order.begin(), order.end());
  std::vector<LyapunovReport> out(order.size());
  parallel_for(order.size(), [&](std::size_t i) { out[i] = lyapunov_qr(mu, q0, n, order[i]); });
  return out;
}

namespace {

Mat right_singular_vectors(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  return svd.matrixV();
}

double largest_principal_angle(const Mat& a, const Mat& b) {
  Eigen::JacobiSVD<Mat> svd(a.transpose() * b);
  const double smin = svd.singularValues().minCoeff();
  return std::acos(std::clamp(smin, -1.0, 1.0));
}

}  // namespace

FlagEstimate oseledets_flag(const walk::WalkMeasure& mu, std::span<const double> q0, std::size_t n,
                            std::uint64_t seed, double gap_threshold) {
  check_start(mu, q0, n);
  const std::size_t d = mu.space().dim;
  const auto word = sample_word(mu, 2 * n, seed);

  FlagEstimate est;
  std::vector<double> q(q0.begin(), q0.end());
  Mat frame = Mat::Identity(d, d);
  Mat product = Mat::Identity(d, d);
  Vec sums = Vec::Zero(d);
  for (std::size_t step = 0; step < word.size(); ++step) {
    const auto& sys = mu.generator(word[step]);
    Mat jac = sys.jacobian(q);
    sums += qr_step(jac, frame);
    product = jac * product;
    const double norm = product.norm();
    if (norm == 0.0 || !std::isfinite(norm)) throw NonInvertibleJacobian("tangent product degenerated");
    product /= norm;
    sys.apply(q, q);
    if (step + 1 == n) est.directions_half = right_singular_vectors(product);
  }
  est.directions = right_singular_vectors(product);

  est.exponents.resize(d);
  for (std::size_t i = 0; i < d; ++i) est.exponents[i] = sums[i] / static_cast<double>(2 * n);
  std::sort(est.exponents.begin(), est.exponents.end(), std::greater<>());
  for (std::size_t i = 0; i + 1 < d; ++i)
    if (est.exponents[i] - est.exponents[i + 1] < gap_threshold)
      throw GapTooSmall("exponents " + std::to_string(est.exponents[i]) + " and " +
                        std::to_string(est.exponents[i + 1]) + " are closer than the gap threshold");

  for (std::size_t i = 1; i < d; ++i) {
    const long cols = static_cast<long>(d - i);
    est.stability_angles.push_back(largest_principal_angle(est.directions.rightCols(cols),
                                                           est.directions_half.rightCols(cols)));
  }
  return est;
}

ContractionLog contraction_check(std::span<const SystemSpec> word, std::span<const double> q,
                                 std::span<const double> x, std::size_t n, double chart_size) {
  if (word.empty()) throw InvalidArgument("contraction check needs a nonempty word");
  const Space space = word.front().space();
  std::vector<double> a(q.begin(), q.end()), b(x.begin(), x.end());
  ContractionLog log;
  log.exact_coincidence = true;

  std::vector<double> steps, values;
  for (std::size_t k = 0; k <= n; ++k) {
    const double dist = distance(space, a, b);
    log.log_distance.push_back(dist == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(dist));
    if (dist != 0.0) log.exact_coincidence = false;
    if (dist > chart_size && !log.chart_exit_step) log.chart_exit_step = k;
    if (!log.chart_exit_step && dist != 0.0) {
      steps.push_back(static_cast<double>(k));
      values.push_back(log.log_distance.back());
    }
    if (k == n) break;
    const auto& g = word[k % word.size()];
    g.apply(a, a);
    g.apply(b, b);
  }

  if (log.exact_coincidence) {
    log.slope = -std::numeric_limits<double>::infinity();
  } else if (steps.size() < 2) {
    log.slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    const double m = static_cast<double>(steps.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      sx += steps[i];
      sy += values[i];
      sxx += steps[i] * steps[i];
      sxy += steps[i] * values[i];
    }
    log.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return log;
}

}  // namespace rigidlab::dynamics
