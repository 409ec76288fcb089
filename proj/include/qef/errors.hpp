#ifndef QEF_ERRORS_HPP
#define QEF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qef {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Which structural check a model or parameter set failed.
enum class Check {
  dimension,      // parity or shape mismatch
  stability,      // A not Hurwitz
  degeneracy,     // det(BJB^T) = 0
  parameter,      // Pi not PD, Theta not antisymmetric/nonsingular, ...
  realizability,  // PR residual out of tolerance
  structure,      // one-mode structural assumptions
  size            // memory guard
};

inline const char* to_string(Check c) {
  switch (c) {
    case Check::dimension: return "dimension";
    case Check::stability: return "stability";
    case Check::degeneracy: return "degeneracy";
    case Check::parameter: return "parameter";
    case Check::realizability: return "realizability";
    case Check::structure: return "structure";
    case Check::size: return "size";
  }
  return "unknown";
}

class ValidationError : public Error {
 public:
  ValidationError(Check check, const std::string& what)
      : Error(std::string(to_string(check)) + ": " + what), check_(check) {}

  Check check() const noexcept { return check_; }

 private:
  Check check_;
};

/// The risk-sensitivity parameter violates the spectral feasibility condition.
/// `lambda` is the offending frequency (NaN when the violation is not tied to
/// one frequency, e.g. in the finite-horizon oracle).
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double theta, double lambda, double value)
      : Error(what), theta_(theta), lambda_(lambda), value_(value) {}

  double theta() const noexcept { return theta_; }
  double lambda() const noexcept { return lambda_; }
  double value() const noexcept { return value_; }

 private:
  double theta_;
  double lambda_;
  double value_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qef

#endif  // QEF_ERRORS_HPP
