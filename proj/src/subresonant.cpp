#include "rigidlab/subresonant.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "rigidlab/errors.hpp"

namespace rigidlab::subres {

FilteredSpace::FilteredSpace(std::vector<Level> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw InvalidArgument("filtered space needs at least one weight");
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    if (levels_[l].weight <= 0) throw InvalidArgument("weights must be positive");
    if (levels_[l].multiplicity == 0) throw InvalidArgument("multiplicities must be >= 1");
    if (l > 0 && !(levels_[l].weight < levels_[l - 1].weight))
      throw InvalidArgument("weights must be strictly decreasing");
    starts_.push_back(level_of_.size());
    level_of_.insert(level_of_.end(), levels_[l].multiplicity, l);
  }
}

const Rational& FilteredSpace::coordinate_weight(std::size_t i) const {
  if (i >= dim()) throw InvalidCoordinate("coordinate " + std::to_string(i) + " out of range");
  return levels_[level_of_[i]].weight;
}

std::size_t FilteredSpace::level_of(std::size_t i) const {
  if (i >= dim()) throw InvalidCoordinate("coordinate " + std::to_string(i) + " out of range");
  return level_of_[i];
}

MultiIndex MultiIndex::unit(std::size_t dim, std::size_t i) {
  MultiIndex a(dim);
  a.exponents.at(i) = 1;
  return a;
}

std::uint32_t MultiIndex::degree() const {
  return std::accumulate(exponents.begin(), exponents.end(), std::uint32_t{0});
}

long MultiIndex::linear_coordinate() const {
  long found = -1;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] == 0) continue;
    if (exponents[i] != 1 || found >= 0) return -1;
    found = static_cast<long>(i);
  }
  return found;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  MultiIndex r(*this);
  for (std::size_t i = 0; i < r.exponents.size(); ++i) r.exponents[i] += o.exponents[i];
  return r;
}

std::string to_string(const MultiIndex& a) {
  std::ostringstream out;
  bool first = true;
  for (std::size_t i = 0; i < a.exponents.size(); ++i) {
    if (a.exponents[i] == 0) continue;
    if (!first) out << '*';
    out << 'x' << i;
    if (a.exponents[i] > 1) out << '^' << a.exponents[i];
    first = false;
  }
  return first ? "1" : out.str();
}

Rational monomial_weight(const FilteredSpace& space, const MultiIndex& a) {
  if (a.dim() != space.dim())
    throw InvalidCoordinate("monomial references " + std::to_string(a.dim()) + " coordinates, space has " +
                            std::to_string(space.dim()));
  Rational w = 0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.exponents[i] != 0) w += space.coordinate_weight(i) * a.exponents[i];
  return w;
}

// ---------------------------------------------------------------------------
// Polynomials

void add_term(Polynomial& p, const MultiIndex& a, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = p.try_emplace(a, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

Polynomial multiply(const Polynomial& p, const Polynomial& q) {
  Polynomial r;
  for (const auto& [a, c] : p)
    for (const auto& [b, d] : q) add_term(r, a + b, c * d);
  return r;
}

Polynomial substitute(const Polynomial& p, const std::vector<Polynomial>& images, std::size_t dim) {
  // powers[i][k] = images[i]^k, filled lazily.
  std::vector<std::vector<Polynomial>> powers(images.size());
  auto power = [&](std::size_t i, std::uint32_t k) -> const Polynomial& {
    auto& pw = powers[i];
    if (pw.empty()) {
      Polynomial one;
      one.emplace(MultiIndex(dim), Rational(1));
      pw.push_back(std::move(one));
    }
    while (pw.size() <= k) pw.push_back(multiply(pw.back(), images[i]));
    return pw[k];
  };

  Polynomial result;
  for (const auto& [a, c] : p) {
    Polynomial term;
    term.emplace(MultiIndex(dim), c);
    for (std::size_t i = 0; i < a.dim(); ++i)
      if (a.exponents[i] != 0) term = multiply(term, power(i, a.exponents[i]));
    for (const auto& [b, d] : term) add_term(result, b, d);
  }
  return result;
}

PolynomialMap::PolynomialMap(FilteredSpace domain, FilteredSpace codomain)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), components_(codomain_.dim()) {}

void PolynomialMap::add(std::size_t j, const MultiIndex& a, const Rational& c) {
  if (j >= components_.size()) throw InvalidCoordinate("output coordinate " + std::to_string(j) + " out of range");
  if (a.dim() != domain_.dim()) throw InvalidCoordinate("monomial " + to_string(a) + " has wrong dimension");
  add_term(components_[j], a, c);
}

Rational PolynomialMap::coefficient(std::size_t j, const MultiIndex& a) const {
  const auto& p = components_.at(j);
  auto it = p.find(a);
  return it == p.end() ? Rational(0) : it->second;
}

std::size_t PolynomialMap::num_terms() const {
  std::size_t n = 0;
  for (const auto& p : components_) n += p.size();
  return n;
}

// ---------------------------------------------------------------------------
// Rational matrices

RationalMatrix RationalMatrix::identity(std::size_t n) {
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& o) const {
  if (cols != o.rows) throw InvalidArgument("matrix shape mismatch");
  RationalMatrix r(rows, o.cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) {
      const Rational& a = at(i, k);
      if (a == 0) continue;
      for (std::size_t j = 0; j < o.cols; ++j)
        if (o.at(k, j) != 0) r.at(i, j) += a * o.at(k, j);
    }
  return r;
}

std::vector<Rational> RationalMatrix::operator*(const std::vector<Rational>& v) const {
  if (cols != v.size()) throw InvalidArgument("matrix-vector shape mismatch");
  std::vector<Rational> r(rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (at(i, j) != 0) r[i] += at(i, j) * v[j];
  return r;
}

RationalMatrix inverse(const RationalMatrix& m) {
  if (m.rows != m.cols) throw InvalidArgument("inverse of a non-square matrix");
  const std::size_t n = m.rows;
  RationalMatrix a = m, inv = RationalMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a.at(pivot, col) == 0) ++pivot;
    if (pivot == n) throw SingularGradedPart("matrix is singular");
    if (pivot != col)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a.at(pivot, j), a.at(col, j));
        std::swap(inv.at(pivot, j), inv.at(col, j));
      }
    Rational scale = 1 / a.at(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a.at(col, j) *= scale;
      inv.at(col, j) *= scale;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a.at(r, col) == 0) continue;
      Rational f = a.at(r, col);
      for (std::size_t j = 0; j < n; ++j) {
        a.at(r, j) -= f * a.at(col, j);
        inv.at(r, j) -= f * inv.at(col, j);
      }
    }
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Validation and group operations

namespace {

RationalMatrix graded_block(const PolynomialMap& map, std::size_t level) {
  const auto& space = map.domain();
  const std::size_t s = space.level_start(level);
  const std::size_t m = space.levels()[level].multiplicity;
  RationalMatrix block(m, m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c)
      block.at(r, c) = map.coefficient(s + r, MultiIndex::unit(space.dim(), s + c));
  return block;
}

void require_same_space(const FilteredSpace& a, const FilteredSpace& b) {
  if (!(a == b)) throw SpaceMismatch("maps live on different filtered spaces");
}

}  // namespace

SubresonantMap validate(const PolynomialMap& map, bool strict_requested) {
  require_same_space(map.domain(), map.codomain());
  const auto& space = map.domain();
  const std::size_t dim = space.dim();

  bool strict = true;
  std::string strict_witness;
  for (std::size_t j = 0; j < dim; ++j) {
    const Rational& target = space.coordinate_weight(j);
    for (const auto& [a, c] : map.component(j)) {
      Rational w = monomial_weight(space, a);
      if (w > target) {
        throw ResonanceViolation(j, to_string(a),
                                 "monomial " + to_string(a) + " of weight " + rigidlab::to_string(w) +
                                     " exceeds weight " + rigidlab::to_string(target) + " of output " +
                                     std::to_string(j));
      }
      // F - id: the identity contributes 1 to the x_j coefficient.
      const bool is_own = a.linear_coordinate() == static_cast<long>(j);
      const Rational residual = is_own ? Rational(c - 1) : c;
      if (strict && w == target && residual != 0) {
        strict = false;
        strict_witness = "output " + std::to_string(j) + " monomial " + to_string(a);
      }
    }
    // Missing x_j term means F - id carries -x_j at full weight.
    if (strict && map.coefficient(j, MultiIndex::unit(dim, j)) == 0) {
      strict = false;
      strict_witness = "output " + std::to_string(j) + " lacks its own coordinate";
    }
  }

  for (std::size_t level = 0; level < space.num_levels(); ++level) {
    try {
      (void)inverse(graded_block(map, level));
    } catch (const SingularGradedPart&) {
      throw SingularGradedPart("graded linear part at weight " +
                               rigidlab::to_string(space.levels()[level].weight) + " is singular");
    }
  }

  if (strict_requested && !strict) throw StrictnessViolation("not strictly subresonant: " + strict_witness);
  return SubresonantMap(map, strict);
}

SubresonantMap identity(const FilteredSpace& space) {
  PolynomialMap m(space);
  for (std::size_t j = 0; j < space.dim(); ++j) m.add(j, MultiIndex::unit(space.dim(), j), 1);
  return validate(m);
}

SubresonantMap translation(const FilteredSpace& space, const std::vector<Rational>& offset) {
  if (offset.size() != space.dim()) throw InvalidArgument("translation offset has wrong dimension");
  PolynomialMap m(space);
  for (std::size_t j = 0; j < space.dim(); ++j) {
    m.add(j, MultiIndex::unit(space.dim(), j), 1);
    m.add(j, MultiIndex(space.dim()), offset[j]);
  }
  return validate(m);
}

SubresonantMap compose(const SubresonantMap& f, const SubresonantMap& g) {
  require_same_space(f.space(), g.space());
  const auto& space = f.space();
  PolynomialMap out(space);
  for (std::size_t j = 0; j < space.dim(); ++j)
    for (const auto& [a, c] : substitute(f.map().component(j), g.map().components(), space.dim()))
      out.add(j, a, c);
  return validate(out);
}

SubresonantMap invert(const SubresonantMap& f) {
  const auto& space = f.space();
  const std::size_t dim = space.dim();
  std::vector<Polynomial> inv(dim);

  // Output block at level l reads A_l x_l + P_l(lower coordinates), so the
  // inverse on that block is A_l^{-1} (w_l - P_l(inverse on lower blocks)).
  for (std::size_t level = space.num_levels(); level-- > 0;) {
    const std::size_t s = space.level_start(level);
    const std::size_t m = space.levels()[level].multiplicity;
    RationalMatrix block_inv = inverse(graded_block(f.map(), level));

    std::vector<Polynomial> rhs(m);
    for (std::size_t r = 0; r < m; ++r) {
      Polynomial lower;
      for (const auto& [a, c] : f.map().component(s + r)) {
        long lc = a.linear_coordinate();
        if (lc >= static_cast<long>(s) && lc < static_cast<long>(s + m)) continue;
        add_term(lower, a, c);
      }
      Polynomial& target = rhs[r];
      add_term(target, MultiIndex::unit(dim, s + r), 1);
      for (const auto& [a, c] : substitute(lower, inv, dim)) add_term(target, a, -c);
    }
    for (std::size_t k = 0; k < m; ++k) {
      Polynomial& g = inv[s + k];
      for (std::size_t r = 0; r < m; ++r) {
        const Rational& coef = block_inv.at(k, r);
        if (coef == 0) continue;
        for (const auto& [a, c] : rhs[r]) add_term(g, a, coef * c);
      }
    }
  }

  PolynomialMap out(space);
  for (std::size_t j = 0; j < dim; ++j)
    for (const auto& [a, c] : inv[j]) out.add(j, a, c);
  return validate(out);
}

SubresonantMap conjugate(const SubresonantMap& g, const SubresonantMap& f) {
  return compose(compose(g, f), invert(g));
}

SubresonantMap graded_part(const SubresonantMap& f) {
  const auto& space = f.space();
  PolynomialMap out(space);
  for (std::size_t j = 0; j < space.dim(); ++j)
    for (const auto& [a, c] : f.map().component(j))
      if (monomial_weight(space, a) == space.coordinate_weight(j)) out.add(j, a, c);
  return validate(out);
}

namespace {

template <class T>
std::vector<T> evaluate(const SubresonantMap& f, const std::vector<T>& v) {
  const auto& space = f.space();
  if (v.size() != space.dim())
    throw SpaceMismatch("point has dimension " + std::to_string(v.size()) + ", space has " +
                        std::to_string(space.dim()));
  std::vector<T> out(space.dim(), T(0));
  for (std::size_t j = 0; j < space.dim(); ++j)
    for (const auto& [a, c] : f.map().component(j)) {
      T term;
      if constexpr (std::is_same_v<T, double>) term = c.get_d();
      else term = c;
      for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::uint32_t k = 0; k < a.exponents[i]; ++k) term *= v[i];
      out[j] += term;
    }
  return out;
}

}  // namespace

std::vector<Rational> act(const SubresonantMap& f, const std::vector<Rational>& v) { return evaluate(f, v); }
std::vector<double> act(const SubresonantMap& f, const std::vector<double>& v) { return evaluate(f, v); }

// ---------------------------------------------------------------------------
// Linearization

namespace {

void enumerate_monomials(const FilteredSpace& space, const Rational& bound, std::size_t i, MultiIndex& cur,
                         const Rational& used, std::vector<MultiIndex>& out) {
  if (i == space.dim()) {
    out.push_back(cur);
    return;
  }
  const Rational& w = space.coordinate_weight(i);
  Rational total = used;
  for (std::uint32_t e = 0; total <= bound; ++e, total += w) {
    cur.exponents[i] = e;
    enumerate_monomials(space, bound, i + 1, cur, total, out);
  }
  cur.exponents[i] = 0;
}

std::vector<MultiIndex> monomials_up_to(const FilteredSpace& space, const Rational& bound) {
  std::vector<MultiIndex> out;
  MultiIndex cur(space.dim());
  enumerate_monomials(space, bound, 0, cur, Rational(0), out);
  return out;
}

std::vector<std::uint32_t> level_degrees(const FilteredSpace& space, const MultiIndex& a) {
  std::vector<std::uint32_t> d(space.num_levels(), 0);
  for (std::size_t i = 0; i < a.dim(); ++i) d[space.level_of(i)] += a.exponents[i];
  return d;
}

}  // namespace

std::vector<MultiIndex> monomial_basis(const FilteredSpace& space, bool affine) {
  std::vector<MultiIndex> basis;
  for (auto& a : monomials_up_to(space, space.top_weight()))
    if (affine || !a.is_constant()) basis.push_back(std::move(a));

  const std::size_t last = space.num_levels() - 1;
  std::sort(basis.begin(), basis.end(), [&](const MultiIndex& a, const MultiIndex& b) {
    auto da = level_degrees(space, a), db = level_degrees(space, b);
    for (std::size_t l = 0; l < last; ++l)
      if (da[l] != db[l]) return da[l] < db[l];
    if (da[last] != db[last]) return affine ? da[last] < db[last] : da[last] > db[last];
    return a.exponents > b.exponents;
  });
  return basis;
}

LinearizationMatrix linearize(const SubresonantMap& f, bool affine) {
  const auto& space = f.space();
  const std::size_t dim = space.dim();
  if (!affine)
    for (std::size_t j = 0; j < dim; ++j)
      if (f.map().coefficient(j, MultiIndex(dim)) != 0)
        throw LinearizationNeedsAffine("map moves the origin; linearize with the affine flag");

  LinearizationMatrix lin;
  lin.affine = affine;
  lin.basis = monomial_basis(space, affine);
  std::map<MultiIndex, std::size_t> column;
  for (std::size_t k = 0; k < lin.basis.size(); ++k) column.emplace(lin.basis[k], k);

  lin.entries = RationalMatrix(lin.basis.size(), lin.basis.size());
  for (std::size_t row = 0; row < lin.basis.size(); ++row) {
    Polynomial m;
    m.emplace(lin.basis[row], Rational(1));
    for (const auto& [a, c] : substitute(m, f.map().components(), dim)) {
      auto it = column.find(a);
      if (it == column.end())
        throw SingularGradedPart("pullback of " + to_string(lin.basis[row]) + " leaves the basis at " + to_string(a));
      lin.entries.at(row, it->second) = c;
    }
  }
  return lin;
}

namespace {

template <class T>
std::vector<T> embed_impl(const FilteredSpace& space, const std::vector<T>& point, bool affine) {
  if (point.size() != space.dim()) throw SpaceMismatch("point has wrong dimension");
  std::vector<T> out;
  for (const auto& a : monomial_basis(space, affine)) {
    T v = T(1);
    for (std::size_t i = 0; i < a.dim(); ++i)
      for (std::uint32_t k = 0; k < a.exponents[i]; ++k) v *= point[i];
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<Rational> embed(const FilteredSpace& space, const std::vector<Rational>& point, bool affine) {
  return embed_impl(space, point, affine);
}

std::vector<double> embed(const FilteredSpace& space, const std::vector<double>& point, bool affine) {
  return embed_impl(space, point, affine);
}

// ---------------------------------------------------------------------------
// Fibered cocycles

bool validate_fibered(const FiberedCocycleMap& c) {
  const auto& mu = c.fiber_weights;
  if (mu.empty()) throw MalformedStructure("fibered map needs at least one fiber weight");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0) throw MalformedStructure("fiber weights must be positive");
    if (i > 0 && !(mu[i] < mu[i - 1])) throw MalformedStructure("fiber weights must be strictly decreasing");
  }
  const auto& space = c.base.space();
  std::vector<Rational> diagonal(mu.size(), Rational(0));
  bool ok = true;
  for (const auto& t : c.terms) {
    if (t.out >= mu.size() || t.in >= mu.size()) throw MalformedStructure("fiber index out of range");
    if (t.mono.dim() != space.dim()) throw MalformedStructure("fiber monomial has wrong base dimension");
    if (t.coefficient == 0) continue;
    if (monomial_weight(space, t.mono) > mu[t.out] - mu[t.in]) ok = false;
    if (t.out == t.in && t.mono.is_constant()) diagonal[t.out] += t.coefficient;
  }
  for (const auto& a : diagonal)
    if (a == 0) ok = false;
  return ok;
}

// ---------------------------------------------------------------------------
// Random generation

SubresonantMap random_map(const FilteredSpace& space, std::mt19937_64& rng, bool strict, double density,
                          bool with_translation) {
  const std::size_t dim = space.dim();
  std::uniform_int_distribution<int> num(-3, 3), den(1, 3), small(-2, 2);
  std::bernoulli_distribution keep(density);
  auto random_rational = [&] {
    int n = 0;
    while (n == 0) n = num(rng);
    Rational r(n, den(rng));
    r.canonicalize();
    return r;
  };

  PolynomialMap m(space);
  for (std::size_t level = 0; level < space.num_levels(); ++level) {
    const std::size_t s = space.level_start(level);
    const std::size_t k = space.levels()[level].multiplicity;
    if (strict) {
      for (std::size_t r = 0; r < k; ++r) m.add(s + r, MultiIndex::unit(dim, s + r), 1);
      continue;
    }
    for (;;) {
      RationalMatrix block(k, k);
      for (auto& x : block.data) x = small(rng);
      try {
        (void)inverse(block);
      } catch (const SingularGradedPart&) {
        continue;
      }
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) m.add(s + r, MultiIndex::unit(dim, s + c), block.at(r, c));
      break;
    }
  }

  for (std::size_t j = 0; j < dim; ++j) {
    const Rational& target = space.coordinate_weight(j);
    for (const auto& a : monomials_up_to(space, target)) {
      if (a.is_constant() && !with_translation) continue;
      Rational w = monomial_weight(space, a);
      const bool same_level_linear = a.linear_coordinate() >= 0 && w == target;
      if (same_level_linear) continue;
      if (w == target && strict) continue;
      if (keep(rng)) m.add(j, a, random_rational());
    }
  }
  return validate(m, strict);
}

}  // namespace rigidlab::subres
