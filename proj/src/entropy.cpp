#include "rigidlab/entropy.hpp"

#include <cmath>

#include "rigidlab/errors.hpp"

namespace rigidlab::entropy {

void SpectrumSummary::validate() const {
  const std::size_t n = exponents.size();
  if (multiplicities.size() != n) throw MalformedStructure("multiplicities must match the exponents");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(exponents[i])) throw MalformedStructure("exponents must be finite");
    if (i > 0 && !(exponents[i] < exponents[i - 1])) throw MalformedStructure("exponents must be strictly decreasing");
    if (multiplicities[i] == 0) throw MalformedStructure("multiplicities must be positive");
  }
  for (const auto* dims : {&dims_e1, &dims_e2})
    if (*dims && (*dims)->size() != n) throw MalformedStructure("bundle dims must have one entry per exponent");
  for (std::size_t i = 0; i < n; ++i) {
    if (dims_e2 && (*dims_e2)[i] > multiplicities[i]) throw MalformedStructure("dim E2 exceeds the multiplicity");
    if (dims_e1 && (*dims_e1)[i] > (dims_e2 ? (*dims_e2)[i] : multiplicities[i]))
      throw MalformedStructure("E1 must be contained in E2");
  }
}

double shannon_entropy(const walk::WalkMeasure& mu) { return shannon_entropy(mu.probabilities()); }

double shannon_entropy(std::span<const double> probabilities) {
  double total = 0.0, h = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw InvalidArgument("probabilities must be nonnegative");
    total += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("probabilities must sum to 1");
  return h;
}

namespace {

double positive_weighted(const std::vector<double>& exps, const std::vector<unsigned>& dims) {
  double s = 0.0;
  for (std::size_t i = 0; i < exps.size(); ++i)
    if (exps[i] > 0.0) s += exps[i] * dims[i];
  return s;
}

}  // namespace

double pesin_sum(const SpectrumSummary& spec) {
  spec.validate();
  return positive_weighted(spec.exponents, spec.multiplicities);
}

Bounds ly_bounds(const SpectrumSummary& spec) {
  spec.validate();
  if (!spec.dims_e1 || !spec.dims_e2) throw MalformedStructure("both E1 and E2 dims are required");
  return {positive_weighted(spec.exponents, *spec.dims_e1), positive_weighted(spec.exponents, *spec.dims_e2)};
}

RelativeEntropyCheck relative_entropy_bound_check(double H_mu, double h_rel, double tolerance) {
  if (!(H_mu >= 0.0) || !(h_rel >= 0.0)) throw InvalidArgument("entropies must be nonnegative");
  RelativeEntropyCheck c;
  c.gap = H_mu - h_rel;
  c.consistent = h_rel <= H_mu + 1e-12;
  c.invariance_consistent = std::abs(c.gap) <= tolerance;
  return c;
}

StiffnessVerdict stiffness_chain(double H_mu, const SpectrumSummary& z, std::optional<double> h_rel) {
  z.validate();
  if (!(H_mu >= 0.0)) throw InvalidArgument("H(mu) must be nonnegative");
  const auto& dims = z.dims_e2 ? *z.dims_e2 : z.multiplicities;

  StiffnessVerdict v;
  for (std::size_t i = 0; i < z.exponents.size(); ++i) {
    const double term = z.exponents[i] * dims[i];
    if (term > 0) v.positive_part += term;
    else v.negative_part += term;
  }
  v.signed_sum = v.positive_part + v.negative_part;
  v.consistent = v.signed_sum >= -1e-12;

  auto step = [&](std::string text, double lhs, double rhs) {
    v.chain.push_back({std::move(text), lhs, rhs, lhs - rhs});
  };
  step("sum_{lambda>0} lambda dim Z >= -sum_{lambda<0} lambda dim Z", v.positive_part, -v.negative_part);
  step("sum lambda dim Z >= 0", v.signed_sum, 0.0);
  if (h_rel) {
    if (!(*h_rel >= 0.0)) throw InvalidArgument("relative entropy must be nonnegative");
    step("H(mu) >= h_rel", H_mu, *h_rel);
  }
  return v;
}

}  // namespace rigidlab::entropy
