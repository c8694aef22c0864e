#pragma once

// Ego-velocity from the phase difference of an A->B / B->A ultrasonic pulse pair.

#include <cmath>
#include <optional>
#include <string_view>

#include "usnav/common.hpp"
#include "usnav/signal_core.hpp"

namespace usnav {

enum class VelocityMethod { exact, approx };

enum class RejectReason { no_echo, over_speed, wrap_ambiguous, non_physical };

constexpr std::string_view to_string(VelocityMethod m) { return m == VelocityMethod::exact ? "exact" : "approx"; }

constexpr std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::no_echo: return "no_echo";
    case RejectReason::over_speed: return "over_speed";
    case RejectReason::wrap_ambiguous: return "wrap_ambiguous";
    case RejectReason::non_physical: return "non_physical";
  }
  return "";
}

inline VelocityMethod parse_velocity_method(std::string_view s) {
  if (s == "exact") return VelocityMethod::exact;
  if (s == "approx") return VelocityMethod::approx;
  throw Error(ErrorCode::config, "unknown velocity method '" + std::string(s) + "'");
}

struct EstimatorConfig {
  double separation = 0.038;  // a, m
  double c0 = kDefaultSpeedOfSound;
  double v_outlier_max = 2.0;  // m/s
  VelocityMethod method = VelocityMethod::exact;
  std::size_t exclude_ringdown = 20;
  double wrap_margin = 0.02;  // |delta_rad| >= (1 - margin) pi is ambiguous
};

inline void validate(const EstimatorConfig& cfg) {
  if (!(cfg.separation > 0.0) || !(cfg.c0 > 0.0) || !(cfg.v_outlier_max > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "estimator config needs a > 0, c0 > 0, v_outlier_max > 0");
  }
}

struct VelocityEstimate {
  double v = 0.0;          // m/s; raw value is kept even when rejected
  double delta_rad = 0.0;  // phase(B-received) - phase(A-received)
  double delta_m = 0.0;    // path-length difference l_BA2 - l_AB1
  double t1 = 0.0;         // round-trip time used, s
  double lambda = 0.0;     // m
  VelocityMethod method = VelocityMethod::exact;
  bool valid = false;
  std::optional<RejectReason> reject_reason;
};

/// Wrapped phase(B-received) - phase(A-received).
inline double phase_difference(const PeakDetection& peak_at_a, const PeakDetection& peak_at_b) {
  return wrap_phase(peak_at_b.phase - peak_at_a.phase);
}

inline double wavelength(double f_op_hz, double c0) { return c0 / f_op_hz; }

inline double delta_m_from_rad(double delta_rad, double f_op_hz, double c0) {
  if (!(f_op_hz > 0.0)) throw Error(ErrorCode::invalid_argument, "f_op must be positive");
  return delta_rad * wavelength(f_op_hz, c0) / kTwoPi;
}

/// Root of 2 t1 v^2 + 2 a v - c0 delta = 0 with the positive square root, which
/// is the one closer to zero.
inline double velocity_exact(double delta_m, double t1, const EstimatorConfig& cfg) {
  validate(cfg);
  if (!(t1 > 0.0)) throw Error(ErrorCode::invalid_argument, "t1 must be positive");
  const double a = cfg.separation;
  const double disc = 4.0 * a * a + 8.0 * t1 * cfg.c0 * delta_m;
  if (disc < 0.0) throw Error(ErrorCode::non_physical, "non-physical delta");
  return (-2.0 * a + std::sqrt(disc)) / (4.0 * t1);
}

/// The discarded root of the same quadratic.
inline double velocity_exact_other_root(double delta_m, double t1, const EstimatorConfig& cfg) {
  const double a = cfg.separation;
  const double disc = 4.0 * a * a + 8.0 * t1 * cfg.c0 * delta_m;
  if (disc < 0.0) throw Error(ErrorCode::non_physical, "non-physical delta");
  return (-2.0 * a - std::sqrt(disc)) / (4.0 * t1);
}

/// Small-displacement limit a >> v t1.
inline double velocity_approx(double delta_m, const EstimatorConfig& cfg) {
  validate(cfg);
  return delta_m * cfg.c0 / (2.0 * cfg.separation);
}

/// Largest |v| the approx formula can report before the phase wraps.
inline double wrap_velocity_limit(double separation, double f_op_hz, double c0) {
  EstimatorConfig cfg;
  cfg.separation = separation;
  cfg.c0 = c0;
  return velocity_approx(wavelength(f_op_hz, c0) / 2.0, cfg);
}

/// Full pipeline on one pulse pair. Never throws on signal problems; failures
/// are reported through `valid` / `reject_reason`.
inline VelocityEstimate estimate(const IQFrame& frame_a_to_b, const IQFrame& frame_b_to_a, const EstimatorConfig& cfg) {
  validate(cfg);
  VelocityEstimate est;
  est.method = cfg.method;
  est.lambda = wavelength(frame_a_to_b.f_op_hz, cfg.c0);

  PeakDetection at_b;
  PeakDetection at_a;
  try {
    at_b = detect_ground_peak(frame_a_to_b, cfg.exclude_ringdown);
    at_a = detect_ground_peak(frame_b_to_a, cfg.exclude_ringdown);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_echo && e.code() != ErrorCode::invalid_argument) throw;
    est.reject_reason = RejectReason::no_echo;
    return est;
  }

  est.delta_rad = phase_difference(at_a, at_b);
  est.delta_m = delta_m_from_rad(est.delta_rad, frame_a_to_b.f_op_hz, cfg.c0);
  est.t1 = 0.5 * (at_a.t_peak + at_b.t_peak);

  if (cfg.method == VelocityMethod::approx) {
    est.v = velocity_approx(est.delta_m, cfg);
  } else {
    try {
      est.v = velocity_exact(est.delta_m, est.t1, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_physical && e.code() != ErrorCode::invalid_argument) throw;
      est.v = velocity_approx(est.delta_m, cfg);
      est.reject_reason = RejectReason::non_physical;
      return est;
    }
  }

  if (std::abs(est.delta_rad) >= (1.0 - cfg.wrap_margin) * kPi) {
    est.reject_reason = RejectReason::wrap_ambiguous;
  } else if (std::abs(est.v) > cfg.v_outlier_max) {
    est.reject_reason = RejectReason::over_speed;
  } else {
    est.valid = true;
  }
  return est;
}

}  // namespace usnav
