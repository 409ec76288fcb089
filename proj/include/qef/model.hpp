#ifndef QEF_MODEL_HPP
#define QEF_MODEL_HPP

#include <optional>
#include <string>

#include "qef/errors.hpp"
#include "qef/linalg.hpp"

namespace qef {

/// Physical parameters of an open quantum harmonic oscillator.
struct OqhoParams {
  Mat theta_ccr;  // CCR matrix Theta, [X, X^T] = 2i Theta (n x n, antisymmetric)
  Mat energy;     // R, Hamiltonian X^T R X / 2 (n x n, symmetric)
  Mat coupling;   // M, coupling operators M X (m x n)
  Mat weight;     // Pi, cost weight X^T Pi X (n x n, SPD)
};

/// Numerical tolerances for model validation. The defaults are used
/// everywhere unless a caller overrides them.
struct ModelTolerances {
  double realizability = 1e-10;  // PR / ALE residual, relative to 1 + ||A|| ||X||
  double sqrt_floor = 1e-12;     // lambda_min(Pi) > floor * ||Pi||
  double hurwitz = 1e-9;         // max Re eig(A) < -hurwitz * ||A||
  double degeneracy = 1e-12;     // sigma_min(BJB^T) > degeneracy * ||B||^2
  double antisymmetry = 1e-12;   // ||Theta + Theta^T|| <= tol * ||Theta||
};

/// Validated state-space realization. Immutable after construction; obtain
/// one through `realize` or `from_state_space`.
class StateSpace {
 public:
  const Mat& a() const { return a_; }
  const Mat& b() const { return b_; }
  const Mat& j() const { return j_; }
  const Mat& weight() const { return weight_; }
  const Mat& s_half() const { return s_half_; }
  const Mat& sigma() const { return sigma_; }
  const Mat& theta_ccr() const { return theta_; }

  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index m() const { return b_.cols(); }

  double a_norm() const { return a_norm_; }
  const CVec& a_eigenvalues() const { return eig_; }
  /// Tr(Pi B B^T), the coefficient of the 1/lambda^2 high-frequency tails.
  double tail_coefficient() const { return tail_coef_; }
  double pr_residual() const { return pr_residual_; }
  double sigma_residual() const { return sigma_residual_; }
  double hurwitz_margin() const { return -eig_.real().maxCoeff(); }
  double det_bjb() const { return (b_ * j_ * b_.transpose()).determinant(); }

 private:
  friend StateSpace make_state_space(const Mat&, const Mat&, const Mat&, const Mat&,
                                     const ModelTolerances&);
  StateSpace() = default;

  Mat a_, b_, j_, weight_, s_half_, sigma_, theta_;
  CVec eig_;
  double a_norm_ = 0.0;
  double tail_coef_ = 0.0;
  double pr_residual_ = 0.0;
  double sigma_residual_ = 0.0;
};

/// Commutator and covariance kernels of Z = S X at one time lag.
struct KernelSample {
  double tau = 0.0;
  Mat lambda_k;  // Lambda(tau)
  Mat p_k;       // P(tau)
};

/// J = bJ kron I_{m/2} with bJ = [[0, 1], [-1, 0]].
inline Mat build_j_matrix(Eigen::Index m) {
  if (m < 2 || m % 2 != 0)
    throw ValidationError(Check::dimension, "J requires an even dimension >= 2, got " +
                                                std::to_string(m));
  Mat bj(2, 2);
  bj << 0.0, 1.0, -1.0, 0.0;
  return linalg::kron(bj, Mat::Identity(m / 2, m / 2));
}

namespace detail {

inline void require_square(const Mat& x, Eigen::Index n, const char* name) {
  if (x.rows() != n || x.cols() != n)
    throw ValidationError(Check::dimension, std::string(name) + " must be " +
                                                std::to_string(n) + "x" + std::to_string(n));
}

inline void require_even(Eigen::Index k, const char* what) {
  if (k < 2 || k % 2 != 0)
    throw ValidationError(Check::dimension,
                          std::string(what) + " must be even and >= 2, got " + std::to_string(k));
}

inline void require_finite(const Mat& x, const char* name) {
  if (!x.allFinite())
    throw ValidationError(Check::parameter, std::string(name) + " has non-finite entries");
}

inline void check_theta(const Mat& theta, const ModelTolerances& tol) {
  const double scale = theta.norm();
  if (scale == 0.0 || (theta + theta.transpose()).norm() > tol.antisymmetry * scale)
    throw ValidationError(Check::parameter, "CCR matrix Theta must be antisymmetric and nonzero");
  Eigen::JacobiSVD<Mat> svd(theta);
  const Vec& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
    throw ValidationError(Check::parameter, "CCR matrix Theta is singular");
}

}  // namespace detail

/// Builds the validated realization from (A, B, Pi, Theta). Throws on any
/// violated invariant.
inline StateSpace make_state_space(const Mat& a, const Mat& b, const Mat& weight,
                                   const Mat& theta, const ModelTolerances& tol) {
  const Eigen::Index n = a.rows();
  StateSpace ss;
  ss.a_ = a;
  ss.b_ = b;
  ss.j_ = build_j_matrix(b.cols());
  ss.weight_ = linalg::sym_part(weight);
  ss.theta_ = linalg::antisym_part(theta);

  ss.eig_ = linalg::eigenvalues(a);
  ss.a_norm_ = linalg::op_norm(a);
  if (!(ss.eig_.real().maxCoeff() < -tol.hurwitz * ss.a_norm_))
    throw ValidationError(Check::stability, "A is not Hurwitz (max Re eig = " +
                                                std::to_string(ss.eig_.real().maxCoeff()) + ")");

  const Mat bjb = b * ss.j_ * b.transpose();
  {
    Eigen::JacobiSVD<Mat> svd(bjb);
    const double bnorm2 = std::pow(linalg::op_norm(b), 2);
    if (!(svd.singularValues()(n - 1) > tol.degeneracy * bnorm2))
      throw ValidationError(Check::degeneracy, "det(BJB^T) = 0");
  }

  ss.s_half_ = linalg::sqrt_spd(ss.weight_, tol.sqrt_floor);

  ss.pr_residual_ = linalg::lyapunov_residual(a, ss.theta_, bjb);
  if (!(ss.pr_residual_ <= tol.realizability * (1.0 + a.norm() * ss.theta_.norm())))
    throw ValidationError(Check::realizability,
                          "PR residual |A Theta + Theta A^T + BJB^T| = " +
                              std::to_string(ss.pr_residual_) + " exceeds tolerance");

  const Mat bbt = b * b.transpose();
  ss.sigma_ = linalg::sym_part(linalg::solve_lyapunov(a, bbt));
  ss.sigma_residual_ = linalg::lyapunov_residual(a, ss.sigma_, bbt);
  if (!(ss.sigma_residual_ <= tol.realizability * (1.0 + a.norm() * ss.sigma_.norm())))
    throw NumericalError("covariance ALE residual exceeds tolerance");

  ss.tail_coef_ = (ss.weight_ * bbt).trace();
  return ss;
}

/// A = 2 Theta (R + M^T J M), B = 2 Theta M^T.
inline StateSpace realize(const OqhoParams& p, const ModelTolerances& tol = {}) {
  const Eigen::Index n = p.theta_ccr.rows();
  detail::require_even(n, "n");
  detail::require_even(p.coupling.rows(), "m");
  detail::require_square(p.theta_ccr, n, "Theta");
  detail::require_square(p.energy, n, "R");
  detail::require_square(p.weight, n, "Pi");
  if (p.coupling.cols() != n)
    throw ValidationError(Check::dimension, "M must have n columns");
  detail::require_finite(p.theta_ccr, "Theta");
  detail::require_finite(p.energy, "R");
  detail::require_finite(p.coupling, "M");
  detail::require_finite(p.weight, "Pi");
  detail::check_theta(p.theta_ccr, tol);
  if ((p.energy - p.energy.transpose()).norm() > 1e-12 * (1.0 + p.energy.norm()))
    throw ValidationError(Check::parameter, "energy matrix R must be symmetric");
  if ((p.weight - p.weight.transpose()).norm() > 1e-12 * (1.0 + p.weight.norm()))
    throw ValidationError(Check::parameter, "weight matrix Pi must be symmetric");

  const Mat j = build_j_matrix(p.coupling.rows());
  const Mat theta = linalg::antisym_part(p.theta_ccr);
  const Mat a = 2.0 * theta * (linalg::sym_part(p.energy) + p.coupling.transpose() * j * p.coupling);
  const Mat b = 2.0 * theta * p.coupling.transpose();
  return make_state_space(a, b, p.weight, theta, tol);
}

/// Realization supplied directly as (A, B, Pi). When Theta is omitted it is
/// recovered as the unique solution of A Theta + Theta A^T + BJB^T = 0.
inline StateSpace from_state_space(const Mat& a, const Mat& b, const Mat& weight,
                                   const std::optional<Mat>& theta_ccr = std::nullopt,
                                   const ModelTolerances& tol = {}) {
  const Eigen::Index n = a.rows();
  detail::require_even(n, "n");
  detail::require_square(a, n, "A");
  detail::require_square(weight, n, "Pi");
  if (b.rows() != n) throw ValidationError(Check::dimension, "B must have n rows");
  detail::require_even(b.cols(), "m");
  detail::require_finite(a, "A");
  detail::require_finite(b, "B");
  detail::require_finite(weight, "Pi");
  if ((weight - weight.transpose()).norm() > 1e-12 * (1.0 + weight.norm()))
    throw ValidationError(Check::parameter, "weight matrix Pi must be symmetric");

  // Stability and degeneracy come first: the Gramian below needs both.
  const double abscissa = linalg::spectral_abscissa(a);
  if (!(abscissa < -tol.hurwitz * linalg::op_norm(a)))
    throw ValidationError(Check::stability,
                          "A is not Hurwitz (max Re eig = " + std::to_string(abscissa) + ")");
  const Mat j = build_j_matrix(b.cols());
  const Mat bjb = b * j * b.transpose();
  {
    Eigen::JacobiSVD<Mat> svd(bjb);
    const double bnorm2 = std::pow(linalg::op_norm(b), 2);
    if (!(bnorm2 > 0.0) || !(svd.singularValues()(n - 1) > tol.degeneracy * bnorm2))
      throw ValidationError(Check::degeneracy, "det(BJB^T) = 0");
  }

  Mat theta;
  if (theta_ccr) {
    detail::require_square(*theta_ccr, n, "Theta");
    detail::require_finite(*theta_ccr, "Theta");
    theta = *theta_ccr;
  } else {
    theta = linalg::antisym_part(linalg::solve_lyapunov(a, bjb));
  }
  detail::check_theta(theta, tol);
  return make_state_space(a, b, weight, theta, tol);
}

/// Lambda(tau) = S e^{tau A} Theta S and P(tau) = S e^{tau A} Sigma S for
/// tau >= 0; negative lags are mirrored: Lambda(-tau) = -Lambda(tau)^T,
/// P(-tau) = P(tau)^T.
inline KernelSample kernel_at(const StateSpace& ss, double tau) {
  const double lag = std::abs(tau);
  const Mat& s = ss.s_half();
  KernelSample k;
  k.tau = tau;
  if (lag == 0.0) {
    k.lambda_k = linalg::antisym_part(s * ss.theta_ccr() * s);
    k.p_k = linalg::sym_part(s * ss.sigma() * s);
    return k;
  }
  const Mat e = linalg::expm(lag * ss.a());
  k.lambda_k = s * e * ss.theta_ccr() * s;
  k.p_k = s * e * ss.sigma() * s;
  if (tau < 0.0) {
    k.lambda_k = (-k.lambda_k.transpose()).eval();
    k.p_k = k.p_k.transpose().eval();
  }
  return k;
}

}  // namespace qef

#endif  // QEF_MODEL_HPP
