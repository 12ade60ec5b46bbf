#pragma once

#include <vector>

#include "rigidlab/rational.hpp"
#include "rigidlab/rng.hpp"
#include "rigidlab/system.hpp"

namespace rigidlab::walk {

// Finitely supported probability measure on generators. Probabilities are
// exact rationals summing to one.
class WalkMeasure {
 public:
  struct Atom {
    dynamics::SystemSpec system;
    Rational probability;
  };

  // Throws InvalidArgument on empty support, nonpositive probabilities, a
  // total other than 1, or generators on different spaces.
  explicit WalkMeasure(std::vector<Atom> atoms);

  static WalkMeasure dirac(dynamics::SystemSpec g) { return WalkMeasure({{std::move(g), Rational(1)}}); }
  static WalkMeasure uniform(std::vector<dynamics::SystemSpec> gens);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const dynamics::SystemSpec& generator(std::size_t i) const { return atoms_.at(i).system; }
  double probability(std::size_t i) const { return probs_.at(i); }
  const std::vector<double>& probabilities() const noexcept { return probs_; }
  const dynamics::Space& space() const noexcept { return space_; }
  bool constant_jacobian() const;

  std::size_t sample(Rng& rng) const { return size() == 1 ? 0 : rng.pick(cumulative_); }

 private:
  std::vector<Atom> atoms_;
  std::vector<double> probs_, cumulative_;
  dynamics::Space space_;
};

}  // namespace rigidlab::walk
