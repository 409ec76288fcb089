#ifndef QEF_RATE_HPP
#define QEF_RATE_HPP

#include <limits>
#include <vector>

#include "qef/config.hpp"
#include "qef/linalg.hpp"
#include "qef/model.hpp"
#include "qef/spectral.hpp"

namespace qef {

/// Growth rate of the quadratic-exponential functional at one theta,
/// together with its classical counterpart and diagnostics.
struct RateResult {
  double theta = 0.0;
  double upsilon = 0.0;      // quantum growth rate
  double classical_v = 0.0;  // H-infinity entropy integral V(theta); NaN if theta >= theta0
  double margin = 0.0;       // feasibility value (grid sup and tail bound)
  double tail_contrib = 0.0; // contribution of lambda > cutoff to upsilon
  long n_freq = 0;
  bool accuracy_warning = false;  // |Simpson - trapezoid| > 1e-6 |value|
};

/// Per-frequency integrands behind a RateResult (lambda >= 0 only).
struct FrequencyRow {
  double lambda = 0.0;
  double neg_log_det_d = 0.0;
  double classical_integrand = 0.0;  // -ln det(I - theta Phi), NaN if undefined
  double feasibility = 0.0;
};

struct BoundResult {
  double value = 0.0;
  double theta = 0.0;  // minimizer
  std::size_t feasible_points = 0;
};

namespace detail {

struct CanonicalSample {
  CMat phi;
  CMat h;
};

// Phi(-l) = conj Phi(l) and H(-l) = -conj H(l) hold bitwise for samples built
// by spectral_sample, so mapping back to l >= 0 makes mirrored samples
// produce identical results.
inline CanonicalSample canonical(const SpectralSample& s) {
  if (s.lambda < 0.0) return {s.phi.conjugate(), -s.h.conjugate()};
  return {s.phi, s.h};
}

struct LogDetParts {
  double log_det = 0.0;      // ln det D
  double feasibility = 0.0;  // theta lambda_max(sqrt(K) Phi sqrt(K))
};

inline LogDetParts log_det_d_parts(const SpectralSample& sample, double theta, double tol_imag,
                                   bool check_complex = true) {
  LogDetParts out;
  if (theta == 0.0) return out;
  const CanonicalSample c = canonical(sample);
  Eigen::SelfAdjointEigenSolver<CMat> es(c.h);
  const Vec& w = es.eigenvalues();

  linalg::KahanSum cos_part;
  for (Eigen::Index k = 0; k < w.size(); ++k) cos_part.add(scalar::log_cosh(theta * w(k)));

  const CMat root_k =
      linalg::hermitian_apply(es, [theta](double x) { return std::sqrt(scalar::tanhc(theta * x)); });
  const CMat m = linalg::herm_part(root_k * c.phi * root_k);
  const Vec mu = Eigen::SelfAdjointEigenSolver<CMat>(m, Eigen::EigenvaluesOnly).eigenvalues();
  out.feasibility = theta * mu.maxCoeff();
  if (!(out.feasibility < 1.0))
    throw InfeasibleError("theta violates the spectral feasibility condition at lambda = " +
                              std::to_string(sample.lambda),
                          theta, sample.lambda, out.feasibility);
  linalg::KahanSum phi_part;
  for (Eigen::Index k = 0; k < mu.size(); ++k) phi_part.add(std::log1p(-theta * mu(k)));
  out.log_det = cos_part.value() + phi_part.value();

  if (check_complex) {
    const CMat cos_tp = linalg::hermitian_apply(es, [theta](double x) { return std::cosh(theta * x); });
    const CMat sinc_tp =
        linalg::hermitian_apply(es, [theta](double x) { return scalar::sinhc(theta * x); });
    const Complex det = (cos_tp - theta * c.phi * sinc_tp).determinant();
    if (!(std::abs(std::arg(det)) < tol_imag))
      throw NumericalError("ln det D has imaginary part " + std::to_string(std::arg(det)) +
                           " at lambda = " + std::to_string(sample.lambda));
  }
  return out;
}

/// ln det(I - theta Phi); NaN when theta lambda_max(Phi) >= 1.
inline double classical_log_det(const CMat& phi, double theta) {
  if (theta == 0.0) return 0.0;
  const Vec w = Eigen::SelfAdjointEigenSolver<CMat>(phi, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(theta * w.maxCoeff() < 1.0)) return std::numeric_limits<double>::quiet_NaN();
  linalg::KahanSum s;
  for (Eigen::Index k = 0; k < w.size(); ++k) s.add(std::log1p(-theta * w(k)));
  return s.value();
}

// Tail of -(1/4 pi) int ln det over |lambda| > cutoff; the integrand decays
// as theta Tr(Pi B B^T) / lambda^2.
inline double tail_rate(const StateSpace& ss, double theta, const QuadratureConfig& cfg, double boundary) {
  return tail_integral(cfg.tail_rule, theta * ss.tail_coefficient(), boundary, cfg.cutoff) / (2.0 * pi);
}

inline double tail_feasibility_bound(const StateSpace& ss, double theta, const QuadratureConfig& cfg) {
  if (theta == 0.0) return 0.0;
  const double gap = cfg.cutoff - ss.a_norm();
  if (gap <= 0.0) return std::numeric_limits<double>::infinity();
  const double sb = linalg::op_norm(ss.s_half()) * linalg::op_norm(ss.b());
  return theta * sb * sb / (gap * gap);
}

/// Symmetric integral over R of an even integrand sampled on [0, cutoff]:
/// returns (2 * Simpson, 2 * trapezoid).
template <class Get>
std::pair<double, double> even_integral(const FrequencyMesh& mesh, std::size_t count, Get&& get) {
  linalg::KahanSum simpson, trap;
  for (std::size_t k = 0; k < count; ++k) {
    const double v = get(k);
    simpson.add(mesh.simpson_weight(static_cast<long>(k)) * v);
    trap.add(mesh.trapezoid_weight(static_cast<long>(k)) * v);
  }
  return {2.0 * simpson.value(), 2.0 * trap.value()};
}

template <class Fn>
double golden_section_min(Fn&& f, double lo, double hi, double tol, int max_iter = 80) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace detail

/// D_theta(lambda) = cos(theta Psi) - theta Phi sinc(theta Psi).
inline CMat d_matrix(const SpectralSample& sample, double theta) {
  const TrigBundle t = trig_bundle(sample, theta);
  return t.cos_tp - theta * sample.phi * t.sinc_tp;
}

/// ln det D_theta(lambda), computed as
/// ln det cos(theta Psi) + ln det(I - theta sqrt(K) Phi sqrt(K)), K = tanc(theta Psi),
/// with both factors on Hermitian spectra. The complex determinant of D is
/// only used to assert |Im ln det D| < tol_imag.
inline double log_det_d(const SpectralSample& sample, double theta, double tol_imag = 1e-6) {
  if (theta < 0.0) throw ValidationError(Check::parameter, "theta must be nonnegative");
  return detail::log_det_d_parts(sample, theta, tol_imag).log_det;
}

/// Per-frequency integrands of the growth rate on the mesh [0, cutoff].
inline std::vector<FrequencyRow> rate_profile(const StateSpace& ss, double theta,
                                              const QuadratureConfig& cfg) {
  if (theta < 0.0) throw ValidationError(Check::parameter, "theta must be nonnegative");
  const FrequencyMesh mesh(cfg);
  return linalg::parallel_map<FrequencyRow>(
      static_cast<std::size_t>(mesh.nodes()), cfg.threads, [&](std::size_t k) {
        FrequencyRow row;
        row.lambda = mesh.at(static_cast<long>(k));
        const SpectralSample s = spectral_sample(ss, row.lambda, cfg.mode);
        const auto parts = detail::log_det_d_parts(s, theta, cfg.tol_imag);
        row.neg_log_det_d = -parts.log_det;
        row.feasibility = parts.feasibility;
        row.classical_integrand = -detail::classical_log_det(s.phi, theta);
        return row;
      });
}

/// Growth rate -(1/4 pi) int ln det D_theta(lambda) d lambda by composite
/// Simpson on [0, cutoff] (doubled by symmetry) plus the tail beyond the
/// cutoff from the theta Tr(Pi B B^T) / lambda^2 decay (see TailRule).
inline RateResult upsilon_from_profile(const StateSpace& ss, double theta, const QuadratureConfig& cfg,
                                       const std::vector<FrequencyRow>& rows) {
  const FrequencyMesh mesh(cfg);
  RateResult r;
  r.theta = theta;
  r.n_freq = static_cast<long>(rows.size());
  const auto [simpson, trap] =
      detail::even_integral(mesh, rows.size(), [&](std::size_t k) { return rows[k].neg_log_det_d; });
  r.tail_contrib = detail::tail_rate(ss, theta, cfg, rows.back().neg_log_det_d);
  r.upsilon = simpson / (4.0 * pi) + r.tail_contrib;
  r.accuracy_warning = std::abs(simpson - trap) > 1e-6 * std::abs(simpson);

  bool classical_ok = true;
  for (const auto& row : rows) {
    r.margin = std::max(r.margin, row.feasibility);
    if (std::isnan(row.classical_integrand)) classical_ok = false;
  }
  r.margin = std::max(r.margin, detail::tail_feasibility_bound(ss, theta, cfg));
  if (classical_ok) {
    const auto [cs, ct] = detail::even_integral(
        mesh, rows.size(), [&](std::size_t k) { return rows[k].classical_integrand; });
    (void)ct;
    r.classical_v = cs / (4.0 * pi) + detail::tail_rate(ss, theta, cfg, rows.back().classical_integrand);
  } else {
    r.classical_v = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

inline RateResult upsilon(const StateSpace& ss, double theta, const QuadratureConfig& cfg) {
  return upsilon_from_profile(ss, theta, cfg, rate_profile(ss, theta, cfg));
}

/// H-infinity entropy integral V(theta) = -(1/4 pi) int ln det(I - theta Phi).
inline double classical_v(const StateSpace& ss, double theta, const QuadratureConfig& cfg) {
  if (theta < 0.0) throw ValidationError(Check::parameter, "theta must be nonnegative");
  if (theta == 0.0) return 0.0;
  const FrequencyMesh mesh(cfg);
  const auto vals = linalg::parallel_map<double>(
      static_cast<std::size_t>(mesh.nodes()), cfg.threads, [&](std::size_t k) {
        const double lambda = mesh.at(static_cast<long>(k));
        const double v = detail::classical_log_det(spectral_sample(ss, lambda, cfg.mode).phi, theta);
        if (std::isnan(v))
          throw InfeasibleError("theta >= theta0: classical entropy integral diverges at lambda = " +
                                    std::to_string(lambda),
                                theta, lambda, std::numeric_limits<double>::quiet_NaN());
        return -v;
      });
  const auto [simpson, trap] = detail::even_integral(mesh, vals.size(), [&](std::size_t k) { return vals[k]; });
  (void)trap;
  return simpson / (4.0 * pi) + detail::tail_rate(ss, theta, cfg, vals.back());
}

/// ||F||_inf^2 = sup_lambda lambda_max(Phi(lambda)): coarse scan over
/// [0, cutoff] (plus the resonance frequencies |Im eig A|), then golden-section
/// refinement around the best point.
inline double hinf_norm_squared(const StateSpace& ss, const QuadratureConfig& cfg) {
  auto peak = [&](double lambda) {
    const CMat phi = spectral_sample(ss, lambda, SpectralMode::classical).phi;
    return Eigen::SelfAdjointEigenSolver<CMat>(phi, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  };
  const long coarse = 4096;
  const double dl = cfg.cutoff / static_cast<double>(coarse);
  std::vector<double> candidates;
  for (long k = 0; k <= coarse; ++k) candidates.push_back(dl * static_cast<double>(k));
  for (Eigen::Index k = 0; k < ss.a_eigenvalues().size(); ++k)
    candidates.push_back(std::abs(ss.a_eigenvalues()(k).imag()));

  double best_l = 0.0, best_v = -1.0;
  for (double l : candidates) {
    const double v = peak(l);
    if (v > best_v) {
      best_v = v;
      best_l = l;
    }
  }
  const double lo = std::max(0.0, best_l - dl), hi = best_l + dl;
  const double l_star = detail::golden_section_min([&](double l) { return -peak(l); }, lo, hi, 1e-12 * (1.0 + hi));
  return std::max(best_v, peak(l_star));
}

/// theta0 = 1 / ||F||_inf^2, the classical feasibility threshold.
inline double theta_threshold(const StateSpace& ss, const QuadratureConfig& cfg) {
  return 1.0 / hinf_norm_squared(ss, cfg);
}

/// (1/2) ||F||_2^2 = (1/2) Tr(Pi Sigma) with A Sigma + Sigma A^T + B B^T = 0.
inline double lqg_rate(const Mat& a, const Mat& b, const Mat& weight) {
  if (b.size() == 0 || b.isZero(0.0)) return 0.0;
  const Mat sigma = linalg::solve_lyapunov(a, b * b.transpose());
  return 0.5 * (weight * sigma).trace();
}

inline double lqg_rate(const StateSpace& ss) { return 0.5 * (ss.weight() * ss.sigma()).trace(); }

/// V(theta) + (theta^2 / 8 pi) int Tr((I - theta Phi)^{-1} (I - theta Phi / 3) Psi^2).
inline double small_theta_expansion(const StateSpace& ss, double theta, const QuadratureConfig& cfg) {
  if (theta == 0.0) return 0.0;
  const double v = classical_v(ss, theta, cfg);
  const FrequencyMesh mesh(cfg);
  const auto vals = linalg::parallel_map<double>(
      static_cast<std::size_t>(mesh.nodes()), cfg.threads, [&](std::size_t k) {
        const SpectralSample s = spectral_sample(ss, mesh.at(static_cast<long>(k)), cfg.mode);
        Eigen::SelfAdjointEigenSolver<CMat> es(s.phi);
        const CMat g = linalg::hermitian_apply(
            es, [theta](double x) { return (1.0 - theta * x / 3.0) / (1.0 - theta * x); });
        return (g * (s.psi * s.psi)).trace().real();
      });
  const auto [simpson, trap] = detail::even_integral(mesh, vals.size(), [&](std::size_t k) { return vals[k]; });
  (void)trap;
  // Tr(Psi^2) decays as lambda^-4: no leading lambda^-2 term in the tail.
  const double tail = 2.0 * tail_integral(cfg.tail_rule, 0.0, vals.back(), cfg.cutoff);
  return v + theta * theta / (8.0 * pi) * (simpson + tail);
}

namespace detail {

// cos(X) and sinc(X) for a general square matrix by Taylor series on
// X / 2^j followed by the doubling rules cos 2Y = 2 cos^2 Y - I,
// sinc 2Y = sinc Y cos Y.
inline std::pair<CMat, CMat> cos_sinc_series(const CMat& x) {
  const Eigen::Index n = x.rows();
  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm)) throw NumericalError("non-finite argument to matrix cos/sinc");
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  if (squarings > 60) throw NumericalError("matrix cos/sinc series: argument too large");
  const CMat y = x / std::ldexp(1.0, squarings);
  const CMat y2 = y * y;
  const CMat eye = CMat::Identity(n, n);
  CMat c = eye, sc = eye, term_c = eye, term_s = eye;
  for (int k = 1; k <= 30; ++k) {
    term_c = (-term_c * y2 / static_cast<double>((2 * k - 1) * (2 * k))).eval();
    term_s = (-term_s * y2 / static_cast<double>((2 * k) * (2 * k + 1))).eval();
    c += term_c;
    sc += term_s;
    if (term_c.norm() < 1e-18 && term_s.norm() < 1e-18) break;
  }
  for (int k = 0; k < squarings; ++k) {
    sc = (sc * c).eval();
    c = (2.0 * c * c - eye).eval();
  }
  if (!c.allFinite() || !sc.allFinite()) throw NumericalError("matrix cos/sinc series diverged");
  return {c, sc};
}

}  // namespace detail

/// E_theta(s) = cos(theta mho(s)) - theta Gamma(s) sinc(theta mho(s)) with
/// Gamma(s) = F(s) F(-s)^T and mho(s) = F(s) J F(-s)^T.
inline CMat contour_e(const StateSpace& ss, Complex s, double theta) {
  const CMat fs = transfer(ss, s);
  const CMat fm = transfer(ss, -s);
  const CMat gamma = fs * fm.transpose();
  const CMat mho = fs * ss.j().cast<Complex>() * fm.transpose();
  const auto [c, sc] = detail::cos_sinc_series(theta * mho);
  return c - theta * gamma * sc;
}

namespace detail {

template <class Objective>
BoundResult grid_then_golden(const std::vector<double>& grid, Objective&& objective, const char* what) {
  std::vector<double> thetas, values;
  for (double t : grid) {
    try {
      const double v = objective(t);
      if (std::isfinite(v)) {
        thetas.push_back(t);
        values.push_back(v);
      }
    } catch (const InfeasibleError&) {
    }
  }
  if (thetas.empty()) throw ValidationError(Check::parameter, std::string(what) + ": no feasible theta on the grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  BoundResult r{values[best], thetas[best], thetas.size()};
  if (thetas.size() < 2) return r;
  const double lo = thetas[best == 0 ? 0 : best - 1];
  const double hi = thetas[best + 1 < thetas.size() ? best + 1 : best];
  const double t_star = golden_section_min(
      [&](double t) {
        try {
          return objective(t);
        } catch (const InfeasibleError&) {
          return std::numeric_limits<double>::infinity();
        }
      },
      lo, hi, 1e-6 * (hi - lo) + 1e-14, 60);
  try {
    const double v = objective(t_star);
    if (v < r.value) {
      r.value = v;
      r.theta = t_star;
    }
  } catch (const InfeasibleError&) {
  }
  return r;
}

}  // namespace detail

/// inf_theta (Upsilon(theta) - alpha theta): exponential decay-rate bound for
/// the tail probability of the quadratic cost.
inline BoundResult tail_bound(const StateSpace& ss, double alpha, const std::vector<double>& theta_grid,
                              const QuadratureConfig& cfg) {
  if (!(alpha > 0.0)) throw ValidationError(Check::parameter, "alpha must be positive");
  return detail::grid_then_golden(
      theta_grid, [&](double t) { return upsilon(ss, t, cfg).upsilon - alpha * t; }, "tail_bound");
}

/// 2 inf_theta (eps + Upsilon(theta)) / theta: worst-case quadratic cost
/// growth rate over states within relative-entropy budget eps.
inline BoundResult worst_case_lqg_bound(const StateSpace& ss, double eps, const std::vector<double>& theta_grid,
                                        const QuadratureConfig& cfg) {
  if (!(eps >= 0.0)) throw ValidationError(Check::parameter, "eps must be nonnegative");
  std::vector<double> positive;
  for (double t : theta_grid)
    if (t > 0.0) positive.push_back(t);
  return detail::grid_then_golden(
      positive, [&](double t) { return 2.0 * (eps + upsilon(ss, t, cfg).upsilon) / t; },
      "worst_case_lqg_bound");
}

}  // namespace qef

#endif  // QEF_RATE_HPP
