#ifndef QEF_TWO_MODE_EXAMPLE_HPP
#define QEF_TWO_MODE_EXAMPLE_HPP

#include "qef/model.hpp"

// Two-mode oscillator (n = 4, m = 6) with Theta = (1/2) bJ kron I_2. The
// matrices are stored to the four decimals they are usually quoted with, so
// Theta is recovered from the PR equation instead of being taken verbatim.

namespace qef::example {

inline Mat two_mode_a() {
  Mat a(4, 4);
  a << -5.8100, -1.6357, 0.2062, -3.1331,
        4.0006,  0.1377, 5.3578, -0.5514,
        1.1223, -3.0351, -5.7830, 4.4308,
        2.7957, -0.8671, -2.2443, -0.0737;
  return a;
}

inline Mat two_mode_b() {
  Mat b(4, 6);
  b << -0.4698,  0.5026,  1.9107, -1.0020,  1.8676, -1.0523,
        0.8036, -0.0727, -1.9520,  2.4997, -1.2066, -0.7074,
       -0.1061, -0.1776,  0.9175, -0.3621, -0.2116,  2.3771,
       -2.2158, -1.3753, -1.2109, -0.8576,  0.3423,  1.1991;
  return b;
}

inline Mat two_mode_weight() {
  Mat pi(4, 4);
  pi << 3.2123,  3.5111,  1.3912, -1.8097,
        3.5111, 10.6258,  3.7561, -3.7850,
        1.3912,  3.7561,  3.3244, -0.5456,
       -1.8097, -3.7850, -0.5456,  1.9349;
  return pi;
}

inline StateSpace two_mode() { return from_state_space(two_mode_a(), two_mode_b(), two_mode_weight()); }

}  // namespace qef::example

#endif  // QEF_TWO_MODE_EXAMPLE_HPP
