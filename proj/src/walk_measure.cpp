#include "rigidlab/walk_measure.hpp"

#include "rigidlab/errors.hpp"

namespace rigidlab::walk {

WalkMeasure::WalkMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw InvalidArgument("walk measure needs at least one atom");
  space_ = atoms_.front().system.space();
  Rational total = 0;
  double running = 0;
  for (const auto& a : atoms_) {
    if (a.probability <= 0) throw InvalidArgument("atom probabilities must be positive");
    if (!(a.system.space() == space_))
      throw InvalidArgument("generators act on different spaces: " + dynamics::to_string(space_) + " vs " +
                            dynamics::to_string(a.system.space()));
    total += a.probability;
    probs_.push_back(a.probability.get_d());
    running += probs_.back();
    cumulative_.push_back(running);
  }
  if (total != 1) throw InvalidArgument("atom probabilities sum to " + to_string(total) + ", not 1");
}

WalkMeasure WalkMeasure::uniform(std::vector<dynamics::SystemSpec> gens) {
  std::vector<Atom> atoms;
  const Rational p(1, static_cast<unsigned long>(gens.size()));
  for (auto& g : gens) atoms.push_back({std::move(g), p});
  return WalkMeasure(std::move(atoms));
}

bool WalkMeasure::constant_jacobian() const {
  for (const auto& a : atoms_)
    if (!a.system.constant_jacobian()) return false;
  return true;
}

}  // namespace rigidlab::walk
