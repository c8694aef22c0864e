#pragma once

// Test-only reference computations. These deliberately avoid the library's
// code paths (no root finding, no shared helpers beyond plain structs).

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

struct TwoWay {
  double length_ab, length_ba, time_ab, time_ba;
};

// Mirror-image geometry: the receiver's image sits (h_emit + h_recv) below the
// emitter plane, so c0 t = |(d0 + v t, H)| is a quadratic in t.
inline double flight_time(double d0, double v, double H, double c0) {
  const double A = c0 * c0 - v * v;
  const double B = -2.0 * d0 * v;
  const double C = -(d0 * d0 + H * H);
  return (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
}

// A is a/2 ahead of the drone centre, B a/2 behind, drone moving along +x.
inline TwoWay two_way(double a, double h_a, double h_b, double v, double c0) {
  const double H = h_a + h_b;
  const double t_ab = flight_time(-a, v, H, c0);
  const double t_ba = flight_time(+a, v, H, c0);
  return {c0 * t_ab, c0 * t_ba, t_ab, t_ba};
}

// Exact two-way path difference: l_BA2 - l_AB1 = 2 a v / (c0 (1 - v^2/c0^2)).
inline double exact_delta(double a, double v, double c0) { return 2.0 * a * v / (c0 * (1.0 - v * v / (c0 * c0))); }

// First-order bias of the quadratic velocity formula against the exact geometry:
// v_quadratic ~= v - v^2 t1 / a.
inline double quadratic_bias(double v, double t1, double a) { return -v * v * t1 / a; }

inline std::size_t argmax_lowest(const std::vector<double>& xs, std::size_t from) {
  std::size_t best = from;
  for (std::size_t k = from; k < xs.size(); ++k) {
    if (xs[k] > xs[best]) best = k;
  }
  return best;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
