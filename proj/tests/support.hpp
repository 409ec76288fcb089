#ifndef QEF_TESTS_SUPPORT_HPP
#define QEF_TESTS_SUPPORT_HPP

// Independent oracles and fixtures shared by the unit, property and
// acceptance suites. Nothing here calls into the library's numerical
// routines except to build a validated model.

#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qef/qef.hpp"

namespace qef::fixtures {

/// exp(X) by Taylor series on X / 2^s followed by s squarings.
inline Mat expm_series(const Mat& x) {
  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::ldexp(1.0, s) > 0.25) ++s;
  const Mat y = x / std::ldexp(1.0, s);
  Mat term = Mat::Identity(x.rows(), x.cols()), acc = term;
  for (int k = 1; k < 40; ++k) {
    term = (term * y / static_cast<double>(k)).eval();
    acc += term;
  }
  for (int k = 0; k < s; ++k) acc = (acc * acc).eval();
  return acc;
}

/// 4 x 4 inverse via cofactors, for cross-checking the LU path.
inline CMat adjugate_inverse4(const CMat& a) {
  auto minor3 = [&](int skip_r, int skip_c) {
    std::array<int, 3> r{}, c{};
    for (int i = 0, k = 0; i < 4; ++i)
      if (i != skip_r) r[k++] = i;
    for (int i = 0, k = 0; i < 4; ++i)
      if (i != skip_c) c[k++] = i;
    auto e = [&](int i, int j) { return a(r[i], c[j]); };
    return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
           e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
  };
  CMat cof(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) cof(i, j) = ((i + j) % 2 == 0 ? 1.0 : -1.0) * minor3(i, j);
  Complex det = 0.0;
  for (int j = 0; j < 4; ++j) det += a(0, j) * cof(0, j);
  return cof.transpose() / det;
}

/// Scalar surrogate: A = -a I2, B = g I2, Pi = I2. Phi = g^2/(a^2 + lambda^2) I2.
inline StateSpace scalar_surrogate(double a, double g) {
  return from_state_space(-a * Mat::Identity(2, 2), g * Mat::Identity(2, 2), Mat::Identity(2, 2));
}

/// Residue value of -(1/4 pi) int ln(1 - theta g^2/(a^2 + lambda^2)) per
/// channel is (a/2)(1 - sqrt(1 - theta g^2/a^2)); two channels.
inline double scalar_surrogate_v(double a, double g, double theta) {
  return a * (1.0 - std::sqrt(1.0 - theta * g * g / (a * a)));
}

inline QuadratureConfig classical_config(const StateSpace& ss) {
  auto cfg = QuadratureConfig::for_model(ss);
  cfg.mode = SpectralMode::classical;
  return cfg;
}

/// Random stable OQHO with Theta = (1/2) bJ kron I_{n/2}. Draws until the
/// realization passes validation.
struct RandomModel {
  StateSpace ss;
  OqhoParams params;
};

inline RandomModel random_model(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    OqhoParams p;
    p.theta_ccr = 0.5 * build_j_matrix(n);
    Mat x(n, n), y(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        x(i, j) = g(rng);
        y(i, j) = g(rng);
      }
    p.energy = x * x.transpose() / static_cast<double>(n) + 0.5 * Mat::Identity(n, n);
    p.weight = y * y.transpose() / static_cast<double>(n) + 0.2 * Mat::Identity(n, n);
    p.coupling.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) p.coupling(i, j) = g(rng);
    try {
      StateSpace ss = realize(p);
      if (ss.hurwitz_margin() < 0.05) continue;
      return {std::move(ss), std::move(p)};
    } catch (const ValidationError&) {
    }
  }
  throw std::runtime_error("could not draw a stable model");
}

inline constexpr std::array<std::pair<int, int>, 5> kShapes{{{2, 2}, {2, 4}, {2, 6}, {4, 4}, {4, 6}}};

/// Minimal JSON-schema check: type, required, properties, items, enum.
inline bool schema_accepts(const io::json& schema, const io::json& value, std::string& why, const std::string& at = "$") {
  auto type_ok = [&](const std::string& t) {
    if (t == "object") return value.is_object();
    if (t == "array") return value.is_array();
    if (t == "string") return value.is_string();
    if (t == "number") return value.is_number();
    if (t == "integer") return value.is_number_integer();
    if (t == "boolean") return value.is_boolean();
    if (t == "null") return value.is_null();
    return false;
  };
  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || type_ok(t.get<std::string>());
    } else {
      ok = type_ok(schema["type"].get<std::string>());
    }
    if (!ok) {
      why = at + ": wrong type";
      return false;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == value;
    if (!found) {
      why = at + ": not in enum";
      return false;
    }
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!value.contains(key.get<std::string>())) {
          why = at + ": missing " + key.get<std::string>();
          return false;
        }
    if (schema.contains("properties"))
      for (const auto& [key, sub] : schema["properties"].items())
        if (value.contains(key) && !schema_accepts(sub, value[key], why, at + "." + key)) return false;
  }
  if (value.is_array() && schema.contains("items"))
    for (std::size_t i = 0; i < value.size(); ++i)
      if (!schema_accepts(schema["items"], value[i], why, at + "[" + std::to_string(i) + "]")) return false;
  return true;
}

inline double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace qef::fixtures

#endif  // QEF_TESTS_SUPPORT_HPP
