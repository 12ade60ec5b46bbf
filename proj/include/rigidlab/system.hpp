#pragma once

// Diffeomorphism generators with closed-form Jacobians on the torus, the
// circle, the unit interval, and (for linear test fixtures) R^d.

#include <Eigen/Dense>

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rigidlab/rational.hpp"

namespace rigidlab::dynamics {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

enum class SpaceKind { Interval, Circle, Torus, Euclidean };

struct Space {
  SpaceKind kind = SpaceKind::Torus;
  std::size_t dim = 1;

  bool periodic() const { return kind == SpaceKind::Circle || kind == SpaceKind::Torus; }
  bool operator==(const Space&) const = default;
};

std::string to_string(const Space& s);

// Coordinates reduced to [0, 1).
double wrap_unit(double x);

// Minimal-representative displacement y - x (flat metric on periodic spaces).
std::vector<double> displacement(const Space& s, std::span<const double> x, std::span<const double> y);
double distance(const Space& s, std::span<const double> x, std::span<const double> y);

struct ToralAuto {
  IntMat matrix;
};

struct AffineInterval {
  Rational slope;
  Rational offset;
  // Filled in by SystemSpec from the rationals above.
  double slope_value = 0.0;
  double offset_value = 0.0;
};

struct CircleRotation {
  double angle = 0.0;
};

// One term eps * amplitude * direction * sin(2 pi <frequency, x> + phase) of
// the perturbation added to a toral automorphism.
struct TrigTerm {
  double amplitude = 1.0;
  std::vector<double> direction;
  std::vector<int> frequency;
  double phase = 0.0;
};

struct PerturbedToral {
  IntMat matrix;
  double epsilon = 0.0;
  std::vector<TrigTerm> terms;
};

// Real matrix acting on R^d without reduction.
struct LinearMap {
  Mat matrix;
};

class SystemSpec {
 public:
  using Variant = std::variant<ToralAuto, AffineInterval, CircleRotation, PerturbedToral, LinearMap>;

  // Construction checks the variant's invariants and throws InvalidArgument:
  // unimodular toral matrices, interval maps sending [0,1] into itself, and a
  // Jacobian determinant bounded away from zero on a grid for perturbations.
  explicit SystemSpec(Variant v);

  static SystemSpec toral(IntMat m) { return SystemSpec(ToralAuto{std::move(m)}); }
  static SystemSpec affine(Rational slope, Rational offset) {
    return SystemSpec(AffineInterval{std::move(slope), std::move(offset), 0.0, 0.0});
  }
  static SystemSpec rotation(double angle) { return SystemSpec(CircleRotation{angle}); }
  static SystemSpec linear(Mat m) { return SystemSpec(LinearMap{std::move(m)}); }

  const Variant& variant() const noexcept { return v_; }
  Space space() const;
  std::size_t dim() const { return dim_; }
  std::string kind() const;
  // Jacobian does not depend on the base point.
  bool constant_jacobian() const;

  // Throws DomainError for points off the interval and SpaceMismatch for
  // wrong dimensions. `out` may alias `q`.
  void apply(std::span<const double> q, std::span<double> out) const;
  std::vector<double> apply(std::span<const double> q) const;
  Mat jacobian(std::span<const double> q) const;

  // Inverse generator for toral automorphisms, rotations and linear maps.
  SystemSpec inverse() const;

 private:
  Variant v_;
  std::size_t dim_ = 1;
};

long long integer_determinant(const IntMat& m);

}  // namespace rigidlab::dynamics
