#pragma once

// Parametric sensor descriptions: timing, range, field of view, quantization
// and power for the two ultrasonic variants, the laser ToF and the optical
// flow sensor.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "usnav/common.hpp"
#include "usnav/material.hpp"
#include "usnav/signal_core.hpp"

namespace usnav {

/// Sensor pose relative to the drone body (planar).
struct Mount {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;  // rad, 0 = facing forward
};

struct UltrasonicSensorSpec {
  std::string name;
  double f_op_hz = 50e3;
  int odr_divisor = 4;
  std::size_t n_samples = kMaxIqSamples;
  double fov_deg = 55.0;
  double max_range_m = 9.0;  // datasheet range
  double power_mw = 1.0;
  double comm_overhead_s = 3e-3;   // sensor communication before readout
  double spi_transfer_s = 1.4e-3;  // overlaps the next measurement
  double algorithm_s = 1e-3;       // overlaps the next measurement
  Mount mount;

  double odr_hz() const { return f_op_hz / odr_divisor; }
  double acoustic_time_s() const { return static_cast<double>(n_samples) / odr_hz(); }
  double acoustic_range_m(double c0) const { return acoustic_time_s() * c0 / 2.0; }
  /// Usable range: what the frame spans, capped by the transducer's rating.
  double effective_range_m(double c0) const { return std::min(acoustic_range_m(c0), max_range_m); }
  double range_bin_m(double c0) const { return c0 / (2.0 * odr_hz()); }
};

inline void validate(const UltrasonicSensorSpec& s) {
  if (!(s.f_op_hz > 0.0) || (s.odr_divisor != 2 && s.odr_divisor != 4 && s.odr_divisor != 8)) {
    throw Error(ErrorCode::invalid_argument, "ultrasonic spec: odr divisor must be 2, 4 or 8");
  }
  if (s.n_samples == 0 || s.n_samples > kMaxIqSamples) {
    throw Error(ErrorCode::invalid_argument, "ultrasonic spec: n_samples must be in [1, 340]");
  }
  if (!(s.fov_deg > 0.0 && s.fov_deg < 180.0) || !(s.max_range_m > 0.0) || s.comm_overhead_s < 0.0) {
    throw Error(ErrorCode::invalid_argument, "ultrasonic spec: bad fov/range/overhead");
  }
}

/// 50 kHz long-range variant with the 55 degree horn, used forward-facing.
inline UltrasonicSensorSpec icu30201(int odr_divisor = 4) {
  UltrasonicSensorSpec s;
  s.name = "ICU-30201";
  s.f_op_hz = 50e3;
  s.odr_divisor = odr_divisor;
  s.fov_deg = 55.0;
  s.max_range_m = 9.0;
  s.power_mw = 1.0;
  return s;
}

/// 175 kHz short-range variant, used ground-facing for velocity.
inline UltrasonicSensorSpec icu10201(int odr_divisor = 2) {
  UltrasonicSensorSpec s;
  s.name = "ICU-10201";
  s.f_op_hz = 175e3;
  s.odr_divisor = odr_divisor;
  s.fov_deg = 55.0;
  s.max_range_m = 1.2;
  s.power_mw = 1.0;
  return s;
}

struct LaserToFSpec {
  std::string name = "VL53L1";
  double fov_deg = 27.0;
  double max_range_m = 4.0;
  double power_mw = 50.0;
  double rate_hz = 33.0;
  double range_noise_sigma_m = 0.0;
};

struct OpticalFlowSpec {
  std::string name = "PMW3901";
  double fps = 124.0;
  double pixel_quantum = 0.1;   // readings come in tenths of a pixel
  double focal_scale = 47.7;    // px/rad, 35 px over a 42 degree field
  double power_mw = 66.0;       // flow sensor plus its height ToF
  double noise_sigma_px = 0.2;  // at zero feature density
  double tracking_exponent = 2.0;

  /// Fraction of true image motion the tracker follows on a surface of the
  /// given feature density: 1 - (1 - rho)^k.
  double feature_sensitivity(double feature_density) const {
    return 1.0 - std::pow(1.0 - std::clamp(feature_density, 0.0, 1.0), tracking_exponent);
  }
  double frame_period_s() const { return 1.0 / fps; }
};

struct CycleTiming {
  double acoustic_s = 0.0;
  double total_s = 0.0;
  double rate_hz = 0.0;
  double range_m = 0.0;  // distance covered by the acoustic window
};

/// SPI transfer and the avoidance algorithm run during the next measurement,
/// so only the acoustic window and the communication overhead count.
inline CycleTiming oa_cycle_time(const UltrasonicSensorSpec& spec, double c0 = kDefaultSpeedOfSound) {
  validate(spec);
  CycleTiming t;
  t.acoustic_s = spec.acoustic_time_s();
  t.total_s = t.acoustic_s + spec.comm_overhead_s;
  t.rate_hz = 1.0 / t.total_s;
  t.range_m = spec.acoustic_range_m(c0);
  return t;
}

/// Two ground round trips (A->B then B->A) plus communication.
inline double velocity_cycle_time(double h, double c0 = kDefaultSpeedOfSound, double comm_overhead_s = 3e-3) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_argument, "height must be positive");
  return 4.0 * h / c0 + comm_overhead_s;
}

/// Flow reading as an integer count of pixel quanta.
struct FlowReading {
  std::int64_t quanta = 0;
  double quantum = 0.1;

  double pixels() const { return static_cast<double>(quanta) * quantum; }
};

/// Forward model of one flow frame for a ground displacement at height h.
inline FlowReading optical_flow_reading(double true_displacement, double h, const OpticalFlowSpec& spec,
                                        const Material& surface, Rng& rng) {
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_argument, "height must be positive");
  const double ideal = spec.focal_scale * (true_displacement / h);
  const double rho = std::clamp(surface.feature_density, 0.0, 1.0);
  double flow = spec.feature_sensitivity(rho) * ideal;
  const double sigma = spec.noise_sigma_px * (1.0 - rho);
  if (sigma > 0.0) flow += sigma * standard_normal(rng);
  return FlowReading{static_cast<std::int64_t>(std::llround(flow / spec.pixel_quantum)), spec.pixel_quantum};
}

/// Converts a flow reading back to velocity using the known height.
inline double flow_to_velocity(const FlowReading& r, double h, const OpticalFlowSpec& spec) {
  return r.pixels() * h / (spec.focal_scale * spec.frame_period_s());
}

struct PowerBudget {
  double ultrasonic_oa_mw = 0.0;
  double ultrasonic_velocity_mw = 0.0;
  double laser_mw = 0.0;
  double optical_flow_mw = 0.0;
};

inline PowerBudget power_budget(const UltrasonicSensorSpec& oa, const UltrasonicSensorSpec& vel,
                                const LaserToFSpec& laser, const OpticalFlowSpec& flow) {
  return {oa.power_mw, 2.0 * vel.power_mw, laser.power_mw, flow.power_mw};
}

}  // namespace usnav
