#pragma once

// Entropy bookkeeping over supplied exponents and bundle dimensions. All
// logarithms are natural.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rigidlab/walk_measure.hpp"

namespace rigidlab::entropy {

struct SpectrumSummary {
  std::vector<double> exponents;           // strictly decreasing
  std::vector<unsigned> multiplicities;    // positive
  std::optional<std::vector<unsigned>> dims_e1;  // E1 within E2, per exponent
  std::optional<std::vector<unsigned>> dims_e2;

  // Throws MalformedStructure when the invariants fail.
  void validate() const;
};

double shannon_entropy(const walk::WalkMeasure& mu);
// Throws InvalidArgument unless the entries are nonnegative and sum to 1
// within 1e-12.
double shannon_entropy(std::span<const double> probabilities);

// Sum of lambda * dim over positive exponents, dims defaulting to the
// multiplicities.
double pesin_sum(const SpectrumSummary& spec);

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Positive-exponent weighted sums over dims_e1 and dims_e2.
Bounds ly_bounds(const SpectrumSummary& spec);

struct RelativeEntropyCheck {
  bool consistent = false;            // h_rel <= H_mu + 1e-12
  double gap = 0.0;                   // H_mu - h_rel
  bool invariance_consistent = false; // |gap| <= tolerance
};

RelativeEntropyCheck relative_entropy_bound_check(double H_mu, double h_rel, double tolerance = 1e-9);

struct ChainStep {
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // lhs - rhs; negative means violated
};

struct StiffnessVerdict {
  double signed_sum = 0.0;
  double positive_part = 0.0;
  double negative_part = 0.0;  // sum over negative exponents, <= 0
  bool consistent = false;     // signed_sum >= -1e-12
  std::vector<ChainStep> chain;
};

// Spectrum of the invariant bundle Z; dims are taken from dims_e2 when
// present, else the multiplicities. h(F) = h(F^-1) is taken as given.
StiffnessVerdict stiffness_chain(double H_mu, const SpectrumSummary& z,
                                 std::optional<double> h_rel = std::nullopt);

}  // namespace rigidlab::entropy
