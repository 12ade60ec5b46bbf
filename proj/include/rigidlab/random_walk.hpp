#pragma once

// Empirical measures of random walks, convolution pushforwards, and the
// distances used as stationarity / invariance diagnostics.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rigidlab/system.hpp"
#include "rigidlab/walk_measure.hpp"

namespace rigidlab::walk {

// Weighted point cloud; points are stored flat, `dim` doubles per point.
struct EmpiricalMeasure {
  dynamics::Space space;
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t i) const { return {points.data() + i * space.dim, space.dim}; }
  double total_weight() const;

  static EmpiricalMeasure dirac(dynamics::Space space, std::span<const double> q);
  // Grid j/n (j = 0..n-1) in dimension 1, product grid on tori.
  static EmpiricalMeasure lebesgue_grid(dynamics::Space space, std::size_t per_axis);
};

// Weighted union a*nu1 + b*nu2 (points concatenated).
EmpiricalMeasure mix(const EmpiricalMeasure& nu1, double a, const EmpiricalMeasure& nu2, double b);

struct SimulationOptions {
  std::size_t burn_in = 0;  // drop times 0..burn_in-1
};

// M independent paths from q; every time slice n < N is recorded with weight
// 1/((N - burn_in) M). Path m draws from stream (seed, m); output is ordered
// by path, then time.
EmpiricalMeasure empirical_measure(const WalkMeasure& mu, std::span<const double> q, std::size_t N, std::size_t M,
                                   std::uint64_t seed, const SimulationOptions& opt = {});

// Pushforward of nu by a single generator.
EmpiricalMeasure push(const dynamics::SystemSpec& f, const EmpiricalMeasure& nu);

enum class ConvolveMode { Exact, Sampled };

// Exact: every point replicated per atom with weight w * p (throws
// BudgetExceeded past `size_budget` points). Sampled: one generator per
// point drawn from fixed streams.
EmpiricalMeasure convolve_push(const WalkMeasure& mu, const EmpiricalMeasure& nu, ConvolveMode mode,
                               std::uint64_t seed = 1, std::size_t size_budget = std::size_t{1} << 28);

enum class Metric { KolmogorovSmirnov, WeylFourier };
std::string to_string(Metric m);
// KS on the interval and the circle, Weyl-Fourier on tori.
Metric metric_for(const dynamics::Space& s);

// sup |F1 - F2| over the coordinate CDFs of two 1-dimensional measures.
double ks_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// Nonzero integer frequencies with |k_i| <= K, one of each +-k pair; in
// dimension 1 these are 1..K.
std::vector<std::vector<int>> weyl_frequencies(std::size_t dim, int K);
// Complex sums sum_j w_j e^{2 pi i <k, x_j>} for weyl_frequencies(dim, K).
std::vector<std::complex<double>> fourier_coefficients(const EmpiricalMeasure& nu, int K);
// Magnitudes of the above.
std::vector<double> weyl_coefficients(const EmpiricalMeasure& nu, int K);

// max over frequencies of |c_k(a) - c_k(b)|.
double weyl_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int K);

// Distance in the metric chosen for the space (K used on tori only).
double measure_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, int K = 20);

double stationarity_residual(const WalkMeasure& mu, const EmpiricalMeasure& nu, int K = 20);
std::vector<double> invariance_residual(const WalkMeasure& mu, const EmpiricalMeasure& nu, int K = 20);

struct ResidualReport {
  double stationarity = 0.0;
  std::vector<double> invariance;
  Metric metric = Metric::KolmogorovSmirnov;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;
};

ResidualReport residual_report(const WalkMeasure& mu, const EmpiricalMeasure& nu, int K = 20,
                               std::uint64_t seed = 0);

struct BoxDimension {
  double slope = 0.0;
  std::vector<double> scales;
  std::vector<std::size_t> counts;
};

// Least-squares slope of log(occupied boxes) against log(1/scale) for
// 1-dimensional spaces. Points within 1e-9 box widths of an edge count
// toward a neighbouring occupied box. Throws DegenerateFit with fewer than
// three distinct scales or an empty measure.
BoxDimension box_dimension(const EmpiricalMeasure& nu, std::span<const double> scales);

// Posterior entropy of the last generator given the current point, from
// binned densities: sum over cells B of (mu*nu)(B) * H(p_f (f_*nu)(B) /
// (mu*nu)(B)). Bounded by H(mu), with equality iff every f_*nu agrees with
// mu*nu on the cells.
struct RelativeEntropyEstimate {
  double h_rel = 0.0;
  double H_mu = 0.0;
  double gap = 0.0;
  std::size_t cells = 0;
};

RelativeEntropyEstimate relative_entropy_estimate(const WalkMeasure& mu, const EmpiricalMeasure& nu,
                                                  std::size_t bins_per_axis);

}  // namespace rigidlab::walk
