#ifndef QEF_HOMOTOPY_HPP
#define QEF_HOMOTOPY_HPP

#include <optional>
#include <vector>

#include "qef/config.hpp"
#include "qef/rate.hpp"
#include "qef/spectral.hpp"

namespace qef {

/// Growth rate and its theta-derivative on an ascending theta grid starting
/// at 0, obtained by marching the Riccati equation U' = Psi^2 + U^2 at every
/// mesh frequency.
struct HomotopyTrace {
  std::vector<double> theta_grid;
  std::vector<double> rate_derivative;  // Upsilon'(theta_k)
  std::vector<double> rate;             // Upsilon(theta_k), Tr U integrated alongside U
  double max_asymmetry = 0.0;           // max ||U - U^*|| before re-symmetrization
  /// (lambda, U at theta_max), only filled when requested.
  std::vector<std::pair<double, CMat>> per_freq_u;
};

namespace detail {

inline CMat psi_squared(const SpectralSample& s) {
  // Psi^2 = -H^2 is Hermitian negative semidefinite.
  return linalg::herm_part(-(s.h * s.h));
}

inline CMat u_direct_raw(const SpectralSample& sample, double theta) {
  const TrigBundle t = trig_bundle(sample, theta);
  // sin(theta Psi) = theta Psi sinc(theta Psi)
  const CMat sin_tp = theta * sample.psi * t.sinc_tp;
  const CMat d = t.cos_tp - theta * sample.phi * t.sinc_tp;
  Eigen::PartialPivLU<CMat> lu(d);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13))
    throw InfeasibleError("D_theta is singular at lambda = " + std::to_string(sample.lambda), theta,
                          sample.lambda, std::numeric_limits<double>::quiet_NaN());
  return lu.solve(sample.phi * t.cos_tp + sample.psi * sin_tp);
}

inline CMat riccati_rhs(const CMat& psi2, const CMat& u) { return psi2 + u * u; }

struct RawStep {
  CMat u;
  double asymmetry = 0.0;
  double trace_integral = 0.0;  // RK4 increment of int Tr U d theta over the step
};

inline RawStep u_ode_step_raw(const SpectralSample& sample, const CMat& psi2, const CMat& u, double theta,
                              double d_theta) {
  const CMat k1 = riccati_rhs(psi2, u);
  const CMat k2 = riccati_rhs(psi2, u + 0.5 * d_theta * k1);
  const CMat k3 = riccati_rhs(psi2, u + 0.5 * d_theta * k2);
  const CMat k4 = riccati_rhs(psi2, u + d_theta * k3);
  CMat next = u + (d_theta / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  // Stage states of the augmented system y' = Tr U sum to 6U + h (k1 + k2 + k3).
  const double tr_stages = 6.0 * u.trace().real() + d_theta * (k1 + k2 + k3).trace().real();
  const double before = u.norm(), after = next.norm();
  if (!next.allFinite() || after > 10.0 * (before + d_theta * k1.norm()) + 1e-300)
    throw InfeasibleError("Riccati solution escapes near lambda = " + std::to_string(sample.lambda) +
                              ", theta = " + std::to_string(theta + d_theta),
                          theta + d_theta, sample.lambda, after / std::max(before, 1e-300));
  RawStep r;
  r.asymmetry = (next - next.adjoint()).norm();
  r.trace_integral = d_theta / 6.0 * tr_stages;
  r.u = linalg::herm_part(next);
  return r;
}

}  // namespace detail

/// U_theta = -D_theta^{-1} dD_theta/dtheta
///         = Psi (Psi cos(theta Psi) - Phi sin(theta Psi))^{-1} (Phi cos(theta Psi) + Psi sin(theta Psi)),
/// evaluated as D^{-1}(Phi cos + Psi sin) with D = cos - theta Phi sinc.
inline CMat u_direct(const SpectralSample& sample, double theta) {
  return linalg::herm_part(detail::u_direct_raw(sample, theta));
}

/// One classical RK4 step of U' = Psi^2 + U^2 from theta to theta + d_theta.
inline CMat u_ode_step(const SpectralSample& sample, const CMat& u, double theta, double d_theta) {
  return detail::u_ode_step_raw(sample, detail::psi_squared(sample), u, theta, d_theta).u;
}

/// Upsilon'(theta) = (1/4 pi) int Tr U_theta(lambda) d lambda. Upsilon itself
/// comes from integrating Tr U in theta inside the same RK4 steps.
inline HomotopyTrace rate_by_homotopy(const StateSpace& ss, double theta_max, double d_theta,
                                      const QuadratureConfig& cfg,
                                      const std::vector<double>& keep_u_at = {}) {
  if (theta_max < 0.0) throw ValidationError(Check::parameter, "theta_max must be nonnegative");
  HomotopyTrace trace;
  const FrequencyMesh mesh(cfg);

  long steps = 0;
  if (theta_max > 0.0) {
    if (!(d_theta > 0.0)) throw ValidationError(Check::parameter, "d_theta must be positive");
    steps = std::max(1L, static_cast<long>(std::ceil(theta_max / d_theta - 1e-9)));
  }
  const double h = steps > 0 ? theta_max / static_cast<double>(steps) : 0.0;
  for (long k = 0; k <= steps; ++k) trace.theta_grid.push_back(h * static_cast<double>(k));

  struct NodeTrace {
    std::vector<double> tr;
    std::vector<double> y;  // int_0^theta Tr U
    double asym = 0.0;
    CMat final_u;
  };
  const auto nodes = linalg::parallel_map<NodeTrace>(
      static_cast<std::size_t>(mesh.nodes()), cfg.threads, [&](std::size_t k) {
        const SpectralSample s = spectral_sample(ss, mesh.at(static_cast<long>(k)), cfg.mode);
        const CMat psi2 = detail::psi_squared(s);
        NodeTrace nt;
        nt.tr.reserve(static_cast<std::size_t>(steps + 1));
        CMat u = s.phi;
        nt.tr.push_back(u.trace().real());
        nt.y.reserve(static_cast<std::size_t>(steps + 1));
        nt.y.push_back(0.0);
        for (long i = 0; i < steps; ++i) {
          auto step = detail::u_ode_step_raw(s, psi2, u, trace.theta_grid[static_cast<std::size_t>(i)], h);
          nt.asym = std::max(nt.asym, step.asymmetry);
          u = std::move(step.u);
          nt.tr.push_back(u.trace().real());
          nt.y.push_back(nt.y.back() + step.trace_integral);
        }
        nt.final_u = std::move(u);
        return nt;
      });

  for (std::size_t i = 0; i < trace.theta_grid.size(); ++i) {
    const double simpson =
        detail::even_integral(mesh, nodes.size(), [&](std::size_t k) { return nodes[k].tr[i]; }).first;
    const double tail_tr = tail_integral(cfg.tail_rule, ss.tail_coefficient(), nodes.back().tr[i], cfg.cutoff);
    trace.rate_derivative.push_back((simpson + 2.0 * tail_tr) / (4.0 * pi));
    const double y =
        detail::even_integral(mesh, nodes.size(), [&](std::size_t k) { return nodes[k].y[i]; }).first;
    const double tail_y = tail_integral(cfg.tail_rule, ss.tail_coefficient() * trace.theta_grid[i],
                                        nodes.back().y[i], cfg.cutoff);
    trace.rate.push_back((y + 2.0 * tail_y) / (4.0 * pi));
  }
  for (const auto& nt : nodes) trace.max_asymmetry = std::max(trace.max_asymmetry, nt.asym);
  for (double l : keep_u_at) {
    const long k = std::lround(l / mesh.h);
    if (k >= 0 && k < mesh.nodes())
      trace.per_freq_u.emplace_back(mesh.at(k), nodes[static_cast<std::size_t>(k)].final_u);
  }
  return trace;
}

/// ||D'' + D Psi^2||_F with D'' from a central difference of D_theta in theta;
/// D_theta solves the linear equation D'' = -D Psi^2.
inline double d_second_derivative_check(const SpectralSample& sample, double theta, double d_theta = 1e-4) {
  const CMat dm = d_matrix(sample, theta - d_theta);
  const CMat d0 = d_matrix(sample, theta);
  const CMat dp = d_matrix(sample, theta + d_theta);
  const CMat second = (dp - 2.0 * d0 + dm) / (d_theta * d_theta);
  return (second + d0 * (sample.psi * sample.psi)).norm();
}

}  // namespace qef

#endif  // QEF_HOMOTOPY_HPP
