#ifndef QEF_CONFIG_HPP
#define QEF_CONFIG_HPP

#include <algorithm>
#include <cmath>

#include "qef/model.hpp"

namespace qef {

/// Integral of the even integrand beyond the cutoff. `asymptote` uses the
/// leading c / lambda^2 term only; `matched` adds a d / lambda^4 term fitted to
/// the integrand at the cutoff; `truncate` drops the tail.
enum class TailRule { matched, asymptote, truncate };

/// int_cutoff^inf g for g ~ leading / lambda^2, given g(cutoff) = boundary.
inline double tail_integral(TailRule rule, double leading, double boundary, double cutoff) {
  switch (rule) {
    case TailRule::truncate:
      return 0.0;
    case TailRule::asymptote:
      return leading / cutoff;
    case TailRule::matched:
      break;
  }
  return (2.0 * leading + boundary * cutoff * cutoff) / (3.0 * cutoff);
}

/// `classical` drops the commutator spectrum (Psi = 0), which turns every
/// quantum quantity into its classical counterpart.
enum class SpectralMode { quantum, classical };

/// Frequency mesh and integration controls shared by the rate, homotopy and
/// feasibility routines. The integrand is even in lambda, so only [0, cutoff]
/// is sampled.
struct QuadratureConfig {
  double cutoff = 100.0;
  double step = 0.005;
  TailRule tail_rule = TailRule::matched;
  double tol_imag = 1e-6;
  SpectralMode mode = SpectralMode::quantum;
  unsigned threads = 1;

  /// cutoff = max(100, 10 max|eig A|), step = 5e-5 * cutoff.
  static QuadratureConfig for_model(const StateSpace& ss) {
    QuadratureConfig cfg;
    cfg.cutoff = std::max(100.0, 10.0 * ss.a_eigenvalues().cwiseAbs().maxCoeff());
    cfg.step = 5e-5 * cfg.cutoff;
    return cfg;
  }

  void validate() const {
    if (!(cutoff > 0.0) || !(step > 0.0) || !(step * 4.0 <= cutoff))
      throw ValidationError(Check::parameter, "quadrature needs cutoff > 0 and 0 < step << cutoff");
    if (!(tol_imag > 0.0)) throw ValidationError(Check::parameter, "tol_imag must be positive");
  }
};

/// Composite Simpson mesh on [0, cutoff] with an even number of intervals.
struct FrequencyMesh {
  double h = 0.0;
  long intervals = 0;

  explicit FrequencyMesh(const QuadratureConfig& cfg) {
    cfg.validate();
    intervals = 2 * static_cast<long>(std::ceil(cfg.cutoff / (2.0 * cfg.step) - 1e-9));
    intervals = std::max(intervals, 2L);
    h = cfg.cutoff / static_cast<double>(intervals);
  }

  long nodes() const { return intervals + 1; }
  double at(long k) const { return h * static_cast<double>(k); }

  double simpson_weight(long k) const {
    if (k == 0 || k == intervals) return h / 3.0;
    return (k % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
  }
  double trapezoid_weight(long k) const {
    return (k == 0 || k == intervals) ? 0.5 * h : h;
  }
};

}  // namespace qef

#endif  // QEF_CONFIG_HPP
