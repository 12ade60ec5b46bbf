#include "rigidlab/system.hpp"

#include <cmath>
#include <numbers>

#include "rigidlab/errors.hpp"

namespace rigidlab::dynamics {

std::string to_string(const Space& s) {
  switch (s.kind) {
    case SpaceKind::Interval: return "interval";
    case SpaceKind::Circle: return "circle";
    case SpaceKind::Torus: return "torus-" + std::to_string(s.dim);
    case SpaceKind::Euclidean: return "euclidean-" + std::to_string(s.dim);
  }
  return "?";
}

double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

std::vector<double> displacement(const Space& s, std::span<const double> x, std::span<const double> y) {
  if (x.size() != s.dim || y.size() != s.dim) throw SpaceMismatch("point dimension does not match " + to_string(s));
  std::vector<double> d(s.dim);
  for (std::size_t i = 0; i < s.dim; ++i) {
    d[i] = y[i] - x[i];
    if (s.periodic()) d[i] -= std::round(d[i]);
  }
  return d;
}

double distance(const Space& s, std::span<const double> x, std::span<const double> y) {
  double acc = 0;
  for (double v : displacement(s, x, y)) acc += v * v;
  return std::sqrt(acc);
}

long long integer_determinant(const IntMat& m) {
  // Bareiss fraction-free elimination in 128-bit arithmetic.
  const auto n = m.rows();
  if (n != m.cols()) throw InvalidArgument("determinant of a non-square matrix");
  if (n == 0) return 1;
  std::vector<__int128> a(m.data(), m.data() + n * n);
  auto at = [&](long r, long c) -> __int128& { return a[c * n + r]; };
  __int128 prev = 1;
  int sign = 1;
  for (long k = 0; k + 1 < n; ++k) {
    if (at(k, k) == 0) {
      long p = k + 1;
      while (p < n && at(p, k) == 0) ++p;
      if (p == n) return 0;
      for (long c = 0; c < n; ++c) std::swap(at(k, c), at(p, c));
      sign = -sign;
    }
    for (long i = k + 1; i < n; ++i)
      for (long j = k + 1; j < n; ++j) at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
    prev = at(k, k);
  }
  return sign * static_cast<long long>(at(n - 1, n - 1));
}

namespace {

Mat perturbed_jacobian(const PerturbedToral& p, std::span<const double> q) {
  Mat j = p.matrix.cast<double>();
  for (const auto& t : p.terms) {
    double arg = t.phase;
    for (std::size_t i = 0; i < q.size(); ++i) arg += 2 * std::numbers::pi * t.frequency[i] * q[i];
    const double c = p.epsilon * t.amplitude * 2 * std::numbers::pi * std::cos(arg);
    for (std::size_t r = 0; r < q.size(); ++r)
      for (std::size_t k = 0; k < q.size(); ++k) j(r, k) += c * t.direction[r] * t.frequency[k];
  }
  return j;
}

void check_unimodular(const IntMat& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw InvalidArgument("toral matrix must be square and nonempty");
  long long det = integer_determinant(m);
  if (det != 1 && det != -1) throw InvalidArgument("toral matrix must have determinant +-1, got " + std::to_string(det));
}

}  // namespace

SystemSpec::SystemSpec(Variant v) : v_(std::move(v)) {
  std::visit(
      [](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ToralAuto>) {
          check_unimodular(s.matrix);
        } else if constexpr (std::is_same_v<T, AffineInterval>) {
          if (s.slope == 0) throw InvalidArgument("affine interval map needs nonzero slope");
          Rational at1 = s.slope + s.offset;
          if (s.offset < 0 || s.offset > 1 || at1 < 0 || at1 > 1)
            throw InvalidArgument("affine map must send [0,1] into [0,1]");
          s.slope_value = s.slope.get_d();
          s.offset_value = s.offset.get_d();
        } else if constexpr (std::is_same_v<T, CircleRotation>) {
          if (!std::isfinite(s.angle)) throw InvalidArgument("rotation angle must be finite");
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          if (s.matrix.rows() == 0 || s.matrix.rows() != s.matrix.cols())
            throw InvalidArgument("linear map must be square and nonempty");
          if (std::abs(s.matrix.determinant()) < 1e-300) throw InvalidArgument("linear map must be invertible");
        } else {
          check_unimodular(s.matrix);
          const auto d = static_cast<std::size_t>(s.matrix.rows());
          for (const auto& t : s.terms)
            if (t.direction.size() != d || t.frequency.size() != d)
              throw InvalidArgument("perturbation term dimension mismatch");
          // Scan a grid of 48 points per axis (capped at 2^16 points overall).
          std::size_t per_axis = 48;
          while (d > 1 && std::pow(static_cast<double>(per_axis), static_cast<double>(d)) > 65536.0) per_axis /= 2;
          std::size_t total = 1;
          for (std::size_t i = 0; i < d; ++i) total *= per_axis;
          std::vector<double> q(d);
          for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rest = idx;
            for (std::size_t i = 0; i < d; ++i) {
              q[i] = static_cast<double>(rest % per_axis) / static_cast<double>(per_axis);
              rest /= per_axis;
            }
            if (std::abs(perturbed_jacobian(s, q).determinant()) < 1e-6)
              throw InvalidArgument("perturbation amplitude too large: Jacobian degenerates on the grid");
          }
        }
      },
      v_);
  dim_ = space().dim;
}

Space SystemSpec::space() const {
  return std::visit(
      [](const auto& s) -> Space {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ToralAuto> || std::is_same_v<T, PerturbedToral>)
          return {SpaceKind::Torus, static_cast<std::size_t>(s.matrix.rows())};
        else if constexpr (std::is_same_v<T, AffineInterval>)
          return {SpaceKind::Interval, 1};
        else if constexpr (std::is_same_v<T, CircleRotation>)
          return {SpaceKind::Circle, 1};
        else
          return {SpaceKind::Euclidean, static_cast<std::size_t>(s.matrix.rows())};
      },
      v_);
}

std::string SystemSpec::kind() const {
  static const char* names[] = {"toral", "affine", "rotation", "perturbed_toral", "linear"};
  return names[v_.index()];
}

bool SystemSpec::constant_jacobian() const { return !std::holds_alternative<PerturbedToral>(v_); }

void SystemSpec::apply(std::span<const double> q, std::span<double> out) const {
  const std::size_t d = dim();
  if (q.size() != d || out.size() != d)
    throw SpaceMismatch("point of dimension " + std::to_string(q.size()) + " for a " + std::to_string(d) +
                        "-dimensional system");
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AffineInterval>) {
          if (!(q[0] >= 0.0 && q[0] <= 1.0)) throw DomainError("point " + std::to_string(q[0]) + " outside [0,1]");
          out[0] = s.slope_value * q[0] + s.offset_value;
          // Rounding may spill past the interval ends.
          out[0] = std::min(1.0, std::max(0.0, out[0]));
        } else if constexpr (std::is_same_v<T, CircleRotation>) {
          out[0] = wrap_unit(q[0] + s.angle);
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          Vec r = s.matrix * Eigen::Map<const Vec>(q.data(), static_cast<long>(d));
          for (std::size_t i = 0; i < d; ++i) out[i] = r[i];
        } else {
          double tmp[16];
          std::vector<double> heap;
          double* r = tmp;
          if (d > 16) {
            heap.resize(d);
            r = heap.data();
          }
          for (std::size_t i = 0; i < d; ++i) {
            double acc = 0;
            for (std::size_t k = 0; k < d; ++k) acc += static_cast<double>(s.matrix(i, k)) * q[k];
            r[i] = acc;
          }
          if constexpr (std::is_same_v<T, PerturbedToral>) {
            for (const auto& t : s.terms) {
              double arg = t.phase;
              for (std::size_t k = 0; k < d; ++k) arg += 2 * std::numbers::pi * t.frequency[k] * q[k];
              const double c = s.epsilon * t.amplitude * std::sin(arg);
              for (std::size_t i = 0; i < d; ++i) r[i] += c * t.direction[i];
            }
          }
          for (std::size_t i = 0; i < d; ++i) out[i] = wrap_unit(r[i]);
        }
      },
      v_);
}

std::vector<double> SystemSpec::apply(std::span<const double> q) const {
  std::vector<double> out(q.size());
  apply(q, out);
  return out;
}

Mat SystemSpec::jacobian(std::span<const double> q) const {
  const std::size_t d = dim();
  if (q.size() != d) throw SpaceMismatch("point dimension does not match system");
  return std::visit(
      [&](const auto& s) -> Mat {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ToralAuto>) {
          return s.matrix.template cast<double>();
        } else if constexpr (std::is_same_v<T, AffineInterval>) {
          if (!(q[0] >= 0.0 && q[0] <= 1.0)) throw DomainError("point outside [0,1]");
          return Mat::Constant(1, 1, s.slope_value);
        } else if constexpr (std::is_same_v<T, CircleRotation>) {
          return Mat::Identity(1, 1);
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          return s.matrix;
        } else {
          return perturbed_jacobian(s, q);
        }
      },
      v_);
}

SystemSpec SystemSpec::inverse() const {
  return std::visit(
      [](const auto& s) -> SystemSpec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ToralAuto>) {
          // Adjugate over the determinant (+-1) keeps the inverse integral.
          const long long det = integer_determinant(s.matrix);
          const auto n = s.matrix.rows();
          IntMat inv(n, n);
          if (n == 1) {
            inv(0, 0) = det;
          } else {
            for (long i = 0; i < n; ++i)
              for (long j = 0; j < n; ++j) {
                IntMat minor(n - 1, n - 1);
                for (long r = 0, rr = 0; r < n; ++r) {
                  if (r == j) continue;
                  for (long c = 0, cc = 0; c < n; ++c) {
                    if (c == i) continue;
                    minor(rr, cc++) = s.matrix(r, c);
                  }
                  ++rr;
                }
                const long long cof = ((i + j) % 2 ? -1 : 1) * integer_determinant(minor);
                inv(i, j) = cof * det;
              }
          }
          return SystemSpec::toral(inv);
        } else if constexpr (std::is_same_v<T, CircleRotation>) {
          return SystemSpec::rotation(-s.angle);
        } else if constexpr (std::is_same_v<T, LinearMap>) {
          return SystemSpec::linear(s.matrix.inverse());
        } else {
          throw InvalidArgument("inverse is only available for toral, rotation and linear systems");
        }
      },
      v_);
}

}  // namespace rigidlab::dynamics
