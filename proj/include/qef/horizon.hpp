#ifndef QEF_HORIZON_HPP
#define QEF_HORIZON_HPP

#include <cblas.h>
#include <lapacke.h>

#include <limits>
#include <vector>

#include "qef/linalg.hpp"
#include "qef/model.hpp"
#include "qef/spectral.hpp"

namespace qef {

/// Finite-horizon estimate of ln Xi_{theta,T} from the discretized integral
/// operators on [0, T].
struct HorizonEstimate {
  double horizon = 0.0;
  long n_grid = 0;
  double ln_xi = 0.0;
  double per_time_rate = 0.0;  // ln Xi / T
  double spec_value = 0.0;     // theta lambda_max(P K), must stay below 1
};

struct ConvergenceStudy {
  std::vector<HorizonEstimate> estimates;
  double extrapolated_rate = 0.0;  // a in the least-squares fit a + b / T
};

struct HorizonOptions {
  /// Largest admitted order nN of the assembled matrices.
  Eigen::Index max_order = 6400;
  /// Drop the commutator kernel (L = 0).
  bool classical = false;
};

/// Midpoint collocation of the commutator and covariance operators.
struct KernelMatrices {
  Mat l;  // real antisymmetric, blocks Lambda(t_j - t_k) dt
  Mat p;  // real symmetric, blocks P(t_j - t_k) dt
  double dt = 0.0;
};

inline KernelMatrices discretize_kernels(const StateSpace& ss, double horizon, long n_grid,
                                         const HorizonOptions& opt = {}) {
  if (!(horizon > 0.0)) throw ValidationError(Check::parameter, "horizon must be positive");
  if (n_grid < 1) throw ValidationError(Check::parameter, "n_grid must be positive");
  const Eigen::Index n = ss.n();
  const Eigen::Index order = n * n_grid;
  if (order > opt.max_order)
    throw ValidationError(Check::size, "discretized operator order " + std::to_string(order) +
                                           " exceeds the limit " + std::to_string(opt.max_order));
  KernelMatrices km;
  km.dt = horizon / static_cast<double>(n_grid);
  km.l.resize(order, order);
  km.p.resize(order, order);
  for (long lag = 0; lag < n_grid; ++lag) {
    const KernelSample k = kernel_at(ss, static_cast<double>(lag) * km.dt);
    const Mat lb = k.lambda_k * km.dt;
    const Mat pb = k.p_k * km.dt;
    for (long col = 0; col + lag < n_grid; ++col) {
      const long row = col + lag;
      km.l.block(row * n, col * n, n, n) = lb;
      km.p.block(row * n, col * n, n, n) = pb;
      if (lag > 0) {
        km.l.block(col * n, row * n, n, n) = -lb.transpose();
        km.p.block(col * n, row * n, n, n) = pb.transpose();
      }
    }
  }
  return km;
}

namespace detail {

inline Vec symmetric_eigen(Mat& a, bool vectors) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Vec w(a.rows());
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'U', n, a.data(), n, w.data());
  if (info != 0) throw NumericalError("dsyevd failed with info = " + std::to_string(info));
  return w;
}

// c = op(a) * op(b)
inline void gemm(bool trans_a, const Mat& a, bool trans_b, const Mat& b, Mat& c) {
  const auto m = static_cast<int>(trans_a ? a.cols() : a.rows());
  const auto k = static_cast<int>(trans_a ? a.rows() : a.cols());
  const auto nn = static_cast<int>(trans_b ? b.rows() : b.cols());
  c.resize(m, nn);
  cblas_dgemm(CblasColMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans, m, nn, k,
              1.0, a.data(), static_cast<int>(a.rows()), b.data(), static_cast<int>(b.rows()), 0.0, c.data(),
              static_cast<int>(c.rows()));
}

}  // namespace detail

struct LnXiParts {
  double ln_xi = 0.0;
  double spec_value = 0.0;
};

/// ln Xi = -(1/2) (Tr ln cos(theta L) + ln det(I - theta P K)), K = tanc(theta L).
///
/// L is real antisymmetric, so cos(theta L) = cosh(theta |L|) and
/// tanc(theta L) = tanhc(theta |L|) are real symmetric functions of
/// G = L^T L = V diag(omega^2) V^T. P K is isospectral to
/// sqrt(K) P sqrt(K) ~ diag(sqrt t) (V^T P V) diag(sqrt t).
inline LnXiParts ln_xi_from_matrices(Mat l, Mat p, double theta, bool classical = false) {
  LnXiParts out;
  if (theta == 0.0) return out;
  if (theta < 0.0) throw ValidationError(Check::parameter, "theta must be nonnegative");
  const Eigen::Index order = p.rows();

  linalg::KahanSum cos_part;
  Mat c;
  if (classical) {
    c = std::move(p);
  } else {
    Mat g;
    detail::gemm(true, l, false, l, g);
    l.resize(0, 0);
    g = linalg::sym_part(g);
    const Vec omega2 = detail::symmetric_eigen(g, true);  // g now holds V
    const double l_norm = std::sqrt(std::max(0.0, omega2.maxCoeff()));
    if (theta * l_norm > 700.0)
      throw NumericalError("theta ||L|| = " + std::to_string(theta * l_norm) + " overflows cosh");
    Vec root_t(order);
    for (Eigen::Index k = 0; k < order; ++k) {
      const double x = theta * std::sqrt(std::max(0.0, omega2(k)));
      cos_part.add(scalar::log_cosh(x));
      root_t(k) = std::sqrt(scalar::tanhc(x));
    }
    Mat w;
    detail::gemm(false, p, false, g, w);  // P V
    p.resize(0, 0);
    detail::gemm(true, g, false, w, c);   // V^T P V
    w.resize(0, 0);
    g.resize(0, 0);
    c = root_t.asDiagonal() * c * root_t.asDiagonal();
  }
  c = linalg::sym_part(c);
  const Vec mu = detail::symmetric_eigen(c, false);
  out.spec_value = theta * mu.maxCoeff();
  if (!(out.spec_value < 1.0))
    throw InfeasibleError("finite-horizon spectral condition violated: theta lambda_max(P K) = " +
                              std::to_string(out.spec_value),
                          theta, std::numeric_limits<double>::quiet_NaN(), out.spec_value);
  linalg::KahanSum phi_part;
  for (Eigen::Index k = 0; k < mu.size(); ++k) phi_part.add(std::log1p(-theta * mu(k)));
  out.ln_xi = -0.5 * (cos_part.value() + phi_part.value());
  return out;
}

inline HorizonEstimate ln_xi(const StateSpace& ss, double theta, double horizon, long n_grid,
                             const HorizonOptions& opt = {}) {
  KernelMatrices km = discretize_kernels(ss, horizon, n_grid, opt);
  const LnXiParts parts = ln_xi_from_matrices(std::move(km.l), std::move(km.p), theta, opt.classical);
  HorizonEstimate e;
  e.horizon = horizon;
  e.n_grid = n_grid;
  e.ln_xi = parts.ln_xi;
  e.per_time_rate = parts.ln_xi / horizon;
  e.spec_value = parts.spec_value;
  return e;
}

/// Fits per_time_rate = a + b / T by least squares; returns a.
inline double extrapolate_rate(const std::vector<HorizonEstimate>& est) {
  if (est.empty()) throw ValidationError(Check::parameter, "no horizons to extrapolate");
  if (est.size() == 1) return est.front().per_time_rate;
  Mat x(static_cast<Eigen::Index>(est.size()), 2);
  Vec y(static_cast<Eigen::Index>(est.size()));
  for (std::size_t i = 0; i < est.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = 1.0;
    x(static_cast<Eigen::Index>(i), 1) = 1.0 / est[i].horizon;
    y(static_cast<Eigen::Index>(i)) = est[i].per_time_rate;
  }
  const Vec coef = x.colPivHouseholderQr().solve(y);
  return coef(0);
}

/// Fixed dt = 1 / n_per_unit_time across all horizons.
inline ConvergenceStudy convergence_study(const StateSpace& ss, double theta, const std::vector<double>& horizons,
                                          long n_per_unit_time, const HorizonOptions& opt = {}) {
  if (n_per_unit_time < 1) throw ValidationError(Check::parameter, "n_per_unit_time must be positive");
  ConvergenceStudy study;
  for (double t : horizons) {
    const long n_grid = std::max(1L, std::lround(t * static_cast<double>(n_per_unit_time)));
    study.estimates.push_back(ln_xi(ss, theta, t, n_grid, opt));
  }
  study.extrapolated_rate = extrapolate_rate(study.estimates);
  return study;
}

}  // namespace qef

#endif  // QEF_HORIZON_HPP
