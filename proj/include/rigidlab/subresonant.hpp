#pragma once

// Exact algebra of subresonant polynomial maps on a weight-filtered vector
// space: validation against the weight condition, the group operations,
// and the monomial (Veronese) linearization.
//
// Conventions: coordinates are numbered by decreasing weight, so level 0
// holds the coordinates of the largest weight. A coefficient c of monomial
// x^a in output j is admissible iff weight(a) <= weight(j). A map is strict
// when every coefficient of (F - id) has weight(a) < weight(j).

#include <compare>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rigidlab/rational.hpp"

namespace rigidlab::subres {

class FilteredSpace {
 public:
  struct Level {
    Rational weight;
    std::size_t multiplicity = 1;
    bool operator==(const Level&) const = default;
  };

  FilteredSpace() = default;
  // Levels must have strictly decreasing positive weights and nonzero
  // multiplicities. Throws InvalidArgument.
  explicit FilteredSpace(std::vector<Level> levels);

  std::size_t dim() const noexcept { return level_of_.size(); }
  std::size_t num_levels() const noexcept { return levels_.size(); }
  const std::vector<Level>& levels() const noexcept { return levels_; }
  const Rational& coordinate_weight(std::size_t i) const;
  std::size_t level_of(std::size_t i) const;
  std::size_t level_start(std::size_t level) const { return starts_.at(level); }
  const Rational& top_weight() const { return levels_.front().weight; }

  bool operator==(const FilteredSpace& o) const { return levels_ == o.levels_; }

 private:
  std::vector<Level> levels_;
  std::vector<std::size_t> level_of_;
  std::vector<std::size_t> starts_;
};

// Dense exponent vector of a monomial in the coordinate functions.
struct MultiIndex {
  std::vector<std::uint32_t> exponents;

  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim) : exponents(dim, 0) {}
  explicit MultiIndex(std::vector<std::uint32_t> e) : exponents(std::move(e)) {}
  static MultiIndex unit(std::size_t dim, std::size_t i);

  std::size_t dim() const noexcept { return exponents.size(); }
  std::uint32_t degree() const;
  bool is_constant() const { return degree() == 0; }
  // Index of the coordinate when this is a single linear coordinate, else -1.
  long linear_coordinate() const;
  MultiIndex operator+(const MultiIndex& o) const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;
};

// Human-readable monomial, e.g. "x0^2*x1" or "1".
std::string to_string(const MultiIndex& a);

// Weight of a monomial: sum of exponent times coordinate weight.
// Throws InvalidCoordinate when `a` does not fit the space.
Rational monomial_weight(const FilteredSpace& space, const MultiIndex& a);

// Sparse polynomial; stored coefficients are never zero.
using Polynomial = std::map<MultiIndex, Rational>;

void add_term(Polynomial& p, const MultiIndex& a, const Rational& c);
Polynomial multiply(const Polynomial& p, const Polynomial& q);
// p(images[0], images[1], ...). Entries of `images` for coordinates that do
// not occur in p may be left empty.
Polynomial substitute(const Polynomial& p, const std::vector<Polynomial>& images, std::size_t dim);

class PolynomialMap {
 public:
  PolynomialMap() = default;
  PolynomialMap(FilteredSpace domain, FilteredSpace codomain);
  // Square map on one space.
  explicit PolynomialMap(FilteredSpace space) : PolynomialMap(space, space) {}

  const FilteredSpace& domain() const noexcept { return domain_; }
  const FilteredSpace& codomain() const noexcept { return codomain_; }
  const std::vector<Polynomial>& components() const noexcept { return components_; }
  const Polynomial& component(std::size_t j) const { return components_.at(j); }

  // Adds c to the coefficient of x^a in output j (zero results are pruned).
  void add(std::size_t j, const MultiIndex& a, const Rational& c);
  Rational coefficient(std::size_t j, const MultiIndex& a) const;
  std::size_t num_terms() const;

  bool operator==(const PolynomialMap& o) const {
    return domain_ == o.domain_ && codomain_ == o.codomain_ && components_ == o.components_;
  }

 private:
  FilteredSpace domain_, codomain_;
  std::vector<Polynomial> components_;
};

// A validated element of the subresonant group. Only `validate` and the
// group operations construct one.
class SubresonantMap {
 public:
  const PolynomialMap& map() const noexcept { return map_; }
  const FilteredSpace& space() const noexcept { return map_.domain(); }
  bool validated() const noexcept { return true; }
  bool strict() const noexcept { return strict_; }

  bool operator==(const SubresonantMap& o) const { return map_ == o.map_; }

 private:
  friend SubresonantMap validate(const PolynomialMap&, bool);
  SubresonantMap(PolynomialMap m, bool strict) : map_(std::move(m)), strict_(strict) {}
  PolynomialMap map_;
  bool strict_ = false;
};

// Checks the weight condition, invertibility of the graded linear part
// (blockwise per weight level) and, when requested, strictness.
// Throws ResonanceViolation, SingularGradedPart, StrictnessViolation,
// SpaceMismatch.
SubresonantMap validate(const PolynomialMap& map, bool strict_requested = false);

SubresonantMap identity(const FilteredSpace& space);
SubresonantMap translation(const FilteredSpace& space, const std::vector<Rational>& offset);

// (F o G)(v) = F(G(v)). Throws SpaceMismatch.
SubresonantMap compose(const SubresonantMap& f, const SubresonantMap& g);

// Graded triangular solve, one linear solve per weight level, lowest first.
SubresonantMap invert(const SubresonantMap& f);

// G o F o G^-1.
SubresonantMap conjugate(const SubresonantMap& g, const SubresonantMap& f);

// Terms of weight exactly equal to their output weight: the image of F
// under the homomorphism whose kernel is the strict subgroup.
SubresonantMap graded_part(const SubresonantMap& f);

std::vector<Rational> act(const SubresonantMap& f, const std::vector<Rational>& v);
std::vector<double> act(const SubresonantMap& f, const std::vector<double>& v);

struct RationalMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<Rational> data;

  RationalMatrix() = default;
  RationalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  static RationalMatrix identity(std::size_t n);

  Rational& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const Rational& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  RationalMatrix operator*(const RationalMatrix& o) const;
  std::vector<Rational> operator*(const std::vector<Rational>& v) const;
  bool operator==(const RationalMatrix&) const = default;
};

// Exact inverse by Gauss-Jordan; throws SingularGradedPart when singular.
RationalMatrix inverse(const RationalMatrix& m);

// Monomials of weight in (0, top weight], plus the constant monomial when
// `affine`. Ordered ascending by per-level degree vectors (largest weight
// level first); the lowest level's degree is compared descending when
// `affine` is false. The linearization is block lower-triangular in this
// order.
std::vector<MultiIndex> monomial_basis(const FilteredSpace& space, bool affine);

struct LinearizationMatrix {
  std::vector<MultiIndex> basis;
  bool affine = false;
  RationalMatrix entries;
};

// Matrix L with embed(F(q)) = L * embed(q). Without `affine` the map must
// fix the origin (LinearizationNeedsAffine otherwise).
LinearizationMatrix linearize(const SubresonantMap& f, bool affine = false);

std::vector<Rational> embed(const FilteredSpace& space, const std::vector<Rational>& point, bool affine = false);
std::vector<double> embed(const FilteredSpace& space, const std::vector<double>& point, bool affine = false);

// Cocycle normal form over a subresonant base: fiber coordinates xi_0..xi_k
// with decreasing weights mu_0 > mu_1 > ...; output fiber i receives
// sum_k xi_k * p_{ik}(base). Term (i, k, a) is admissible iff
// weight(a) <= mu_i - mu_k, so diagonal entries are constants and entries
// from slower to faster fibers vanish.
struct FiberTerm {
  std::size_t out = 0;
  std::size_t in = 0;
  MultiIndex mono;
  Rational coefficient;
};

struct FiberedCocycleMap {
  SubresonantMap base;
  std::vector<Rational> fiber_weights;
  std::vector<FiberTerm> terms;
};

// True iff every fiber term obeys the weight rule and all diagonal constants
// are nonzero. Throws MalformedStructure for bad indices or weights.
bool validate_fibered(const FiberedCocycleMap& c);

// Random element of the group for property testing. Coefficients are small
// rationals; `density` is the probability that an admissible sub-weight
// monomial gets a nonzero coefficient.
SubresonantMap random_map(const FilteredSpace& space, std::mt19937_64& rng, bool strict,
                          double density = 0.5, bool with_translation = true);

}  // namespace rigidlab::subres
