#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rigidlab/system.hpp"
#include "rigidlab/walk_measure.hpp"

namespace rigidlab::dynamics {

// Accumulated tangent cocycle D_q f^n along a word, kept as an explicit
// matrix. Integer products stay exact for toral words while entries fit.
struct TangentCocycle {
  std::vector<std::size_t> word;
  std::vector<double> base_point;
  Mat product;
};

TangentCocycle tangent_cocycle(const walk::WalkMeasure& mu, std::span<const std::size_t> word,
                               std::span<const double> q);

// Word of generator indices drawn from `mu` with the trajectory's stream.
std::vector<std::size_t> sample_word(const walk::WalkMeasure& mu, std::size_t n, std::uint64_t seed);

struct LyapunovReport {
  std::vector<double> exponents;  // descending, nats per step
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  // |sum of exponents - (1/n) sum log|det J||.
  double residual = 0.0;
};

// Benettin QR reorthogonalization along a random word from `mu` (a single
// atom gives the fixed map). Throws NonInvertibleJacobian.
LyapunovReport lyapunov_qr(const walk::WalkMeasure& mu, std::span<const double> q0, std::size_t n,
                           std::uint64_t seed);

// One report per seed, computed in parallel and returned in seed order.
std::vector<LyapunovReport> lyapunov_batch(const walk::WalkMeasure& mu, std::span<const double> q0, std::size_t n,
                                           std::span<const std::uint64_t> seeds);

struct FlagEstimate {
  std::vector<double> exponents;  // QR estimates at 2n steps, descending
  // Columns: right singular vectors of the normalized product at 2n steps,
  // ordered by decreasing growth. E^{<= lambda_i} = span of columns i..d-1.
  Mat directions;
  Mat directions_half;  // same at n steps
  // Largest principal angle between span(columns i..d-1) at n and at 2n,
  // for i = 1..d-1.
  std::vector<double> stability_angles;
};

// Finite-time singular-vector estimate of the forward filtration. Throws
// GapTooSmall when consecutive exponent estimates differ by less than
// `gap_threshold`.
FlagEstimate oseledets_flag(const walk::WalkMeasure& mu, std::span<const double> q0, std::size_t n,
                            std::uint64_t seed, double gap_threshold = 1e-3);

struct ContractionLog {
  std::vector<double> log_distance;  // steps 0..n
  double slope = 0.0;                // least squares over steps inside the chart
  bool exact_coincidence = false;
  std::optional<std::size_t> chart_exit_step;
};

// Follows q and x under the same word (cycled when shorter than n) and
// records log d(f^k x, f^k q). Leaving the chart is reported, not fatal.
ContractionLog contraction_check(std::span<const SystemSpec> word, std::span<const double> q,
                                 std::span<const double> x, std::size_t n, double chart_size = 0.25);

}  // namespace rigidlab::dynamics
