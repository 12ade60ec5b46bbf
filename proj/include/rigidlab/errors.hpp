#pragma once

#include <stdexcept>
#include <string>

namespace rigidlab {

// Base of every library error. `kind()` is the stable name reported by the
// CLI and carried into the Python exception message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), detail_(what) {}
  const std::string& kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string kind_, detail_;
};

#define RIGIDLAB_ERROR(Name)                                              \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(#Name, what) {}        \
  }

RIGIDLAB_ERROR(InvalidArgument);
RIGIDLAB_ERROR(InvalidCoordinate);
RIGIDLAB_ERROR(SpaceMismatch);
RIGIDLAB_ERROR(SingularGradedPart);
RIGIDLAB_ERROR(StrictnessViolation);
RIGIDLAB_ERROR(LinearizationNeedsAffine);
RIGIDLAB_ERROR(MalformedStructure);
RIGIDLAB_ERROR(DomainError);
RIGIDLAB_ERROR(NonInvertibleJacobian);
RIGIDLAB_ERROR(GapTooSmall);
RIGIDLAB_ERROR(BudgetExceeded);
RIGIDLAB_ERROR(DegenerateFit);
RIGIDLAB_ERROR(SchemaError);

#undef RIGIDLAB_ERROR

// Raised when a coefficient sits above the weight of its output coordinate.
class ResonanceViolation : public Error {
 public:
  ResonanceViolation(std::size_t output, std::string monomial, const std::string& detail)
      : Error("ResonanceViolation", detail), output_(output), monomial_(std::move(monomial)) {}
  std::size_t output() const noexcept { return output_; }
  const std::string& monomial() const noexcept { return monomial_; }

 private:
  std::size_t output_;
  std::string monomial_;
};

}  // namespace rigidlab
