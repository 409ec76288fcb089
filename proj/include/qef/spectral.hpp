#ifndef QEF_SPECTRAL_HPP
#define QEF_SPECTRAL_HPP

#include <limits>

#include "qef/config.hpp"
#include "qef/linalg.hpp"
#include "qef/model.hpp"

namespace qef {

/// Spectral pair of Z at one frequency: Phi = F F^* (Hermitian PSD),
/// Psi = F J F^* (skew-Hermitian), and H = i Psi (Hermitian).
struct SpectralSample {
  double lambda = 0.0;
  CMat f_val;
  CMat phi;
  CMat psi;
  CMat h;
};

/// cos, sinc and tanc of theta*Psi, all Hermitian.
struct TrigBundle {
  CMat cos_tp;
  CMat sinc_tp;
  CMat tanc_tp;
  double theta = 0.0;
};

namespace scalar {

/// sinh(x)/x with the removable singularity filled in.
inline double sinhc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sinh(x) / x;
}

/// tanh(x)/x, values in (0, 1].
inline double tanhc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0;
  }
  return std::tanh(x) / x;
}

/// ln cosh(x) without overflow for large |x|.
inline double log_cosh(double x) {
  const double ax = std::abs(x);
  if (ax > 20.0) return ax - std::log(2.0) + std::log1p(std::exp(-2.0 * ax));
  return std::log(std::cosh(x));
}

}  // namespace scalar

/// F(v) = S (v I - A)^{-1} B.
inline CMat transfer(const StateSpace& ss, Complex v) {
  const Eigen::Index n = ss.n();
  const CVec& eig = ss.a_eigenvalues();
  for (Eigen::Index k = 0; k < eig.size(); ++k)
    if (std::abs(v - eig(k)) < 1e-12 * (1.0 + ss.a_norm()))
      throw NumericalError("transfer function evaluated at an eigenvalue of A");
  CMat res = v * CMat::Identity(n, n) - ss.a().cast<Complex>();
  Eigen::PartialPivLU<CMat> lu(res);
  return ss.s_half().cast<Complex>() * lu.solve(ss.b().cast<Complex>());
}

/// Negative frequencies are produced by conjugating the sample at |lambda|,
/// which makes the mirror symmetry Phi(-lambda) = conj Phi(lambda) exact.
inline SpectralSample spectral_sample(const StateSpace& ss, double lambda,
                                      SpectralMode mode = SpectralMode::quantum) {
  SpectralSample s;
  s.lambda = lambda;
  s.f_val = transfer(ss, Complex(0.0, std::abs(lambda)));
  const CMat fj = s.f_val * ss.j().cast<Complex>();
  s.phi = linalg::herm_part(s.f_val * s.f_val.adjoint());
  if (mode == SpectralMode::classical)
    s.psi = CMat::Zero(ss.n(), ss.n());
  else
    s.psi = linalg::skew_herm_part(fj * s.f_val.adjoint());
  if (lambda < 0.0) {
    s.f_val = s.f_val.conjugate().eval();
    s.phi = s.phi.conjugate().eval();
    s.psi = s.psi.conjugate().eval();
  }
  s.h = linalg::herm_part(Complex(0.0, 1.0) * s.psi);
  return s;
}

/// cos(theta Psi) = cosh(theta H), sinc(theta Psi) = sinhc(theta H),
/// tanc(theta Psi) = tanhc(theta H), all through the eigendecomposition of H.
inline TrigBundle trig_bundle(const SpectralSample& sample, double theta) {
  Eigen::SelfAdjointEigenSolver<CMat> es(sample.h);
  TrigBundle t;
  t.theta = theta;
  t.cos_tp = linalg::hermitian_apply(es, [theta](double w) { return std::cosh(theta * w); });
  t.sinc_tp = linalg::hermitian_apply(es, [theta](double w) { return scalar::sinhc(theta * w); });
  t.tanc_tp = linalg::hermitian_apply(es, [theta](double w) { return scalar::tanhc(theta * w); });
  return t;
}

/// theta * lambda_max(sqrt(K) Phi sqrt(K)) with K = tanhc(theta H), at one
/// frequency.
inline double feasibility_value(const SpectralSample& sample, double theta) {
  if (theta == 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(sample.h);
  const CMat root_k =
      linalg::hermitian_apply(es, [theta](double w) { return std::sqrt(scalar::tanhc(theta * w)); });
  const CMat m = linalg::herm_part(root_k * sample.phi * root_k);
  return theta * Eigen::SelfAdjointEigenSolver<CMat>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

struct FeasibilityReport {
  double grid_sup = 0.0;       // sup over the mesh [0, cutoff]
  double argmax_lambda = 0.0;  // where the grid sup is attained
  double tail_bound = 0.0;     // bound for lambda > cutoff
  bool certified = false;      // both parts < 1

  double margin() const { return std::max(grid_sup, tail_bound); }
};

/// Grid supremum of the feasibility value plus the strictly-proper tail bound
/// theta ||S||^2 ||B||^2 / (cutoff - ||A||)^2 for frequencies beyond the mesh.
inline FeasibilityReport feasibility_report(const StateSpace& ss, double theta,
                                            const QuadratureConfig& cfg) {
  if (theta < 0.0) throw ValidationError(Check::parameter, "theta must be nonnegative");
  FeasibilityReport rep;
  if (theta == 0.0) {
    rep.certified = true;
    return rep;
  }
  const FrequencyMesh mesh(cfg);
  const auto values = linalg::parallel_map<double>(
      static_cast<std::size_t>(mesh.nodes()), cfg.threads, [&](std::size_t k) {
        return feasibility_value(spectral_sample(ss, mesh.at(static_cast<long>(k)), cfg.mode), theta);
      });
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] > rep.grid_sup) {
      rep.grid_sup = values[k];
      rep.argmax_lambda = mesh.at(static_cast<long>(k));
    }
  }
  const double gap = cfg.cutoff - ss.a_norm();
  if (gap > 0.0) {
    const double sb = linalg::op_norm(ss.s_half()) * linalg::op_norm(ss.b());
    rep.tail_bound = theta * sb * sb / (gap * gap);
  } else {
    rep.tail_bound = std::numeric_limits<double>::infinity();
  }
  rep.certified = rep.grid_sup < 1.0 && rep.tail_bound < 1.0;
  return rep;
}

/// A value below 1 certifies the spectral feasibility condition.
inline double feasibility_margin(const StateSpace& ss, double theta, const QuadratureConfig& cfg) {
  return feasibility_report(ss, theta, cfg).margin();
}

}  // namespace qef

#endif  // QEF_SPECTRAL_HPP
