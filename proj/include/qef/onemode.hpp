#ifndef QEF_ONEMODE_HPP
#define QEF_ONEMODE_HPP

#include <array>
#include <utility>

#include "qef/linalg.hpp"
#include "qef/model.hpp"

// Closed forms for a one-mode oscillator (n = 2, Theta = bJ / 2) with
// positive definite energy matrix R and weight Pi = R. Used as an analytic
// oracle for the generic spectral pipeline.

namespace qef::onemode {

struct OneModeParams {
  double mu = 0.0;  // M^T J M = mu bJ
  double nu = 0.0;  // sqrt(det R)
  Mat r;            // energy matrix R (2 x 2, SPD)
  Mat m_mat;        // coupling matrix M (m x 2)
};

inline Mat bj() {
  Mat j(2, 2);
  j << 0.0, 1.0, -1.0, 0.0;
  return j;
}

inline CMat bj_c() { return bj().cast<Complex>(); }

/// mu from M^T J M = mu bJ. Throws when M^T J M is off that form or mu <= 0.
inline double extract_mu(const Mat& m_mat, const Mat& j) {
  if (m_mat.cols() != 2) throw ValidationError(Check::dimension, "one-mode coupling must have 2 columns");
  if (j.rows() != m_mat.rows() || j.cols() != m_mat.rows())
    throw ValidationError(Check::dimension, "J must be m x m");
  const Mat mjm = m_mat.transpose() * j * m_mat;
  const double mu = mjm(0, 1);
  if ((mjm - mu * bj()).norm() > 1e-12 * (1.0 + mjm.norm()))
    throw ValidationError(Check::structure, "M^T J M is not a multiple of bJ");
  if (!(mu > 0.0)) throw ValidationError(Check::structure, "one-mode closed forms assume mu > 0");
  return mu;
}

/// A = R^{-1/2} (nu bJ - mu I) sqrt(R), eigenvalues -mu +- i nu.
inline Mat onemode_drift(const Mat& r, double mu) {
  if (r.rows() != 2 || r.cols() != 2) throw ValidationError(Check::dimension, "R must be 2 x 2");
  const Mat root = linalg::sqrt_spd(r);
  const double nu = std::sqrt(r.determinant());
  return root.inverse() * (nu * bj() - mu * Mat::Identity(2, 2)) * root;
}

inline OneModeParams make_params(const Mat& r, const Mat& m_mat) {
  OneModeParams p;
  p.r = linalg::sym_part(r);
  linalg::sqrt_spd(p.r);  // throws unless R is PD
  p.m_mat = m_mat;
  p.mu = extract_mu(m_mat, build_j_matrix(m_mat.rows()));
  p.nu = std::sqrt(p.r.determinant());
  return p;
}

/// Generic model parameters with Theta = bJ / 2 and Pi = R.
inline OqhoParams to_oqho(const OneModeParams& p) {
  return OqhoParams{0.5 * bj(), p.r, p.m_mat, p.r};
}

/// Poles mu +- i nu, -mu +- i nu of a and b.
inline std::array<Complex, 4> poles(double mu, double nu) {
  return {Complex(mu, nu), Complex(mu, -nu), Complex(-mu, nu), Complex(-mu, -nu)};
}

/// (a(s), b(s)) with mho(s) = a(s) I + b(s) bJ.
inline std::pair<Complex, Complex> ab_functions(double mu, double nu, Complex s) {
  for (const Complex& p : poles(mu, nu))
    if (std::abs(s - p) < 1e-10) throw NumericalError("a(s), b(s) evaluated at a pole");
  const Complex common =
      mu * nu / (((s + mu) * (s + mu) + nu * nu) * ((mu - s) * (mu - s) + nu * nu));
  return {common * 2.0 * nu * s, common * (mu * mu + nu * nu - s * s)};
}

inline CMat mho(double mu, double nu, Complex s) {
  const auto [a, b] = ab_functions(mu, nu, s);
  return a * CMat::Identity(2, 2) + b * bj_c();
}

/// F(s) = ((s + mu) I - nu bJ)^{-1} sqrt(R) B for Pi = R.
inline CMat transfer(const OneModeParams& p, const Mat& b, Complex s) {
  const CMat res = (s + p.mu) * CMat::Identity(2, 2) - p.nu * bj_c();
  return res.inverse() * (linalg::sqrt_spd(p.r) * b).cast<Complex>();
}

/// (cos(theta mho(s)), sin(theta mho(s))) from cos(z bJ) = cosh z I and
/// sin(z bJ) = sinh z bJ.
inline std::pair<CMat, CMat> onemode_trig(double mu, double nu, Complex s, double theta) {
  const auto [a, b] = ab_functions(mu, nu, s);
  const Complex ta = theta * a, tb = theta * b;
  const CMat eye = CMat::Identity(2, 2), j = bj_c();
  CMat c = std::cos(ta) * std::cosh(tb) * eye - std::sin(ta) * std::sinh(tb) * j;
  CMat sn = std::sin(ta) * std::cosh(tb) * eye + std::cos(ta) * std::sinh(tb) * j;
  return {c, sn};
}

/// Residue of mho at `pole` by trapezoid quadrature of
/// (1 / 2 pi i) \oint mho(s) ds over a small circle.
inline CMat residue_mho(double mu, double nu, Complex pole, double radius = 1e-3, int nodes = 64) {
  CMat acc = CMat::Zero(2, 2);
  for (int k = 0; k < nodes; ++k) {
    const Complex e = std::polar(radius, 2.0 * pi * k / nodes);
    acc += mho(mu, nu, pole + e) * e;
  }
  return acc / static_cast<double>(nodes);
}

}  // namespace qef::onemode

#endif  // QEF_ONEMODE_HPP
