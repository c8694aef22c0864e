#pragma once

// Property suite for the geometric oracle, shared by the CLI `oracle-check`
// verb and the test suite.

#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "usnav/echo_sim.hpp"
#include "usnav/velocity_estimator.hpp"

namespace usnav {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Smallest ODR divisor whose frame still holds the ground echo of a pair.
inline int divisor_for_height(double h_a, double h_b, double separation, double f_op_hz, double c0,
                              double margin_samples = 8.0) {
  const double rtt = std::hypot(separation * 1.2, h_a + h_b) / c0 * 1.01;
  for (int n : {2, 4, 8}) {
    const double odr = f_op_hz / n;
    if (rtt * odr + margin_samples <= static_cast<double>(kMaxIqSamples - 1)) return n;
  }
  throw Error(ErrorCode::out_of_range, "height beyond the longest frame span");
}

/// Closed form of the same flight time: (c0^2 - v^2) t^2 - 2 d0 v t - (d0^2 + H^2) = 0.
inline double closed_form_flight_time(double d0, double v, double vertical, double c0) {
  const double A = c0 * c0 - v * v;
  const double B = -2.0 * d0 * v;
  const double C = -(d0 * d0 + vertical * vertical);
  return (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
}

inline std::vector<CheckResult> run_oracle_checks(std::uint64_t seed, int n_cases = 1000) {
  std::vector<CheckResult> out;
  Rng rng = make_stream(seed, "oracle-check");
  const double c0 = kDefaultSpeedOfSound;

  {
    double worst = 0.0;
    double worst_residual = 0.0;
    for (int k = 0; k < n_cases; ++k) {
      TwoWayGeometry g;
      g.velocity = uniform(rng, -2.0, 2.0);
      if (std::abs(g.velocity) < 1e-3) g.velocity = 1e-3;
      g.height_a = g.height_b = uniform(rng, 0.2, 1.5);
      g.separation = uniform(rng, 0.02, 0.08);
      const auto s = exact_path_lengths(g);
      const double predicted = 2.0 * g.separation * g.velocity / c0;
      worst = std::max(worst, std::abs((s.length_ba - s.length_ab) - predicted) / std::abs(predicted));
      worst_residual = std::max(worst_residual, s.residual);
    }
    out.push_back({"oracle delta vs 2av/c0 (<=5%)", worst <= 0.05,
                   fmt::format("{} cases, worst relative error {:.3e}, worst residual {:.1e} m", n_cases, worst, worst_residual)});
  }

  {
    double worst = 0.0;
    for (int k = 0; k < n_cases; ++k) {
      const double v = uniform(rng, -2.0, 2.0);
      const double H = uniform(rng, 0.4, 3.0);
      const double d0 = uniform(rng, -0.08, 0.08);
      const double t_closed = closed_form_flight_time(d0, v, H, c0);
      const auto p = detail::solve_pulse(d0, v, 0.5 * H, 0.5 * H, c0);
      worst = std::max(worst, std::abs(p.time - t_closed) / t_closed);
    }
    out.push_back({"root finder vs closed-form flight time (<=1e-10)", worst <= 1e-10,
                   fmt::format("worst relative difference {:.2e}", worst)});
  }

  {
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      TwoWayGeometry g;
      g.velocity = 0.0;
      g.height_a = uniform(rng, 0.2, 1.2);
      g.height_b = uniform(rng, 0.2, 1.2);
      PairConfig pc;
      pc.odr_divisor = divisor_for_height(g.height_a, g.height_b, g.separation, pc.f_op_hz, c0);
      const auto frames = simulate_two_way_pair(g, pc, NoiseSpec{});
      const auto pb = detect_ground_peak(frames.a_to_b, 20);
      const auto pa = detect_ground_peak(frames.b_to_a, 20);
      worst = std::max(worst, std::abs(phase_difference(pa, pb)));
    }
    out.push_back({"height cancellation at v=0, h_A != h_B (<=1e-6 rad)", worst <= 1e-6,
                   fmt::format("worst |delta_rad| {:.2e}", worst)});
  }

  {
    bool monotone = true;
    double previous = 1e9;
    std::string trace;
    for (double v : {2.0, 1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625}) {
      TwoWayGeometry g;
      g.velocity = v;
      const auto s = exact_path_lengths(g);
      const double dev = std::abs(90.0 - s.gamma_ab_deg);
      monotone = monotone && dev < previous;
      previous = dev;
      trace += fmt::format(" v={}:{:.4f}deg", v, s.gamma_ab_deg);
    }
    out.push_back({"gamma -> 90 deg as v*t1/a -> 0", monotone && previous < 0.01, trace});
  }

  {
    NoiseSpec noise{5.0, 0.2, 0.1, 0.05, seed};
    TwoWayGeometry g;
    g.velocity = 0.7;
    const auto a = simulate_two_way_pair(g, PairConfig{}, noise);
    const auto b = simulate_two_way_pair(g, PairConfig{}, noise);
    out.push_back({"determinism: same seed gives identical frames", a.a_to_b == b.a_to_b && a.b_to_a == b.b_to_a, ""});
  }

  {
    double worst = 0.0;
    double worst_eq4 = 0.0;
    EstimatorConfig approx;
    approx.method = VelocityMethod::approx;
    EstimatorConfig exact;
    for (int k = 0; k < 200; ++k) {
      TwoWayGeometry g;
      g.velocity = uniform(rng, -2.0, 2.0);
      g.height_a = g.height_b = uniform(rng, 0.3, 1.0);
      PairConfig pc;
      pc.odr_divisor = divisor_for_height(g.height_a, g.height_b, g.separation, pc.f_op_hz, c0);
      const auto frames = simulate_two_way_pair(g, pc, NoiseSpec{});
      const double scale = std::max(std::abs(g.velocity), 0.25);
      worst = std::max(worst, std::abs(estimate(frames.a_to_b, frames.b_to_a, approx).v - g.velocity) / scale);
      worst_eq4 = std::max(worst_eq4, std::abs(estimate(frames.a_to_b, frames.b_to_a, exact).v - g.velocity) / scale);
    }
    out.push_back({"noise-free round trip, approx method (<=2%)", worst <= 0.02,
                   fmt::format("worst relative error {:.2e}; quadratic (exact) method worst {:.3f} for reference", worst,
                               worst_eq4)});
  }
  return out;
}

}  // namespace usnav
