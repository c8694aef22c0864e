#pragma once

// Baseband IQ frames and the magnitude/phase/peak primitives shared by the
// ranging and velocity pipelines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "usnav/common.hpp"

namespace usnav {

/// Most IQ samples an ICU-x0201 records per measurement.
inline constexpr std::size_t kMaxIqSamples = 340;

struct IQSample {
  double i = 0.0;
  double q = 0.0;

  friend bool operator==(const IQSample&, const IQSample&) = default;
};

struct IQFrame {
  std::string sensor_id;
  double t_emit = 0.0;  // s
  double f_op_hz = 0.0;
  double odr_hz = 0.0;
  std::vector<IQSample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  double sample_period() const { return 1.0 / odr_hz; }

  friend bool operator==(const IQFrame&, const IQFrame&) = default;
};

/// Returns N for odr = f_op / N, or 0 if the pair is not a legal sensor setting.
inline int odr_divisor(double f_op_hz, double odr_hz) {
  for (int n : {2, 4, 8}) {
    if (std::abs(f_op_hz / n - odr_hz) <= 1e-9 * f_op_hz) return n;
  }
  return 0;
}

inline void validate(const IQFrame& frame) {
  if (frame.samples.size() > kMaxIqSamples) {
    throw Error(ErrorCode::invalid_argument, "frame exceeds " + std::to_string(kMaxIqSamples) + " samples");
  }
  if (!(frame.f_op_hz > 0.0) || odr_divisor(frame.f_op_hz, frame.odr_hz) == 0) {
    throw Error(ErrorCode::invalid_argument, "odr must equal f_op / N with N in {2, 4, 8}");
  }
  for (const auto& s : frame.samples) {
    if (!std::isfinite(s.i) || !std::isfinite(s.q)) throw Error(ErrorCode::non_finite, "non-finite IQ sample");
  }
}

/// Maps x into (-pi, pi].
inline double wrap_phase(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::non_finite, "wrap_phase: non-finite input");
  double r = std::remainder(x, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

inline double sample_magnitude(const IQSample& s) { return std::hypot(s.i, s.q); }

inline double sample_phase(const IQSample& s) {
  const double p = std::atan2(s.q, s.i);
  return p <= -kPi ? kPi : p;
}

struct MagnitudePhase {
  std::vector<double> magnitude;
  std::vector<double> phase;
};

inline MagnitudePhase magnitude_phase(const IQFrame& frame) {
  if (frame.samples.empty()) throw Error(ErrorCode::empty_frame, "empty frame");
  MagnitudePhase out;
  out.magnitude.reserve(frame.size());
  out.phase.reserve(frame.size());
  for (const auto& s : frame.samples) {
    out.magnitude.push_back(sample_magnitude(s));
    out.phase.push_back(sample_phase(s));
  }
  return out;
}

struct PeakDetection {
  std::size_t index = 0;
  double t_peak = 0.0;  // round-trip time since emission, s
  double magnitude = 0.0;
  double phase = 0.0;
};

struct PeakOptions {
  std::size_t exclude_ringdown = 20;
  bool parabolic_refine = false;
};

/// Strongest echo after the ringdown window; ties go to the lowest index.
/// Phase is always read at the integer peak index.
inline PeakDetection detect_ground_peak(const IQFrame& frame, const PeakOptions& opts = {}) {
  if (frame.size() <= opts.exclude_ringdown) {
    throw Error(ErrorCode::invalid_argument, "frame shorter than ringdown exclusion window");
  }
  std::size_t best = opts.exclude_ringdown;
  double best_mag = sample_magnitude(frame.samples[best]);
  for (std::size_t k = best + 1; k < frame.size(); ++k) {
    const double m = sample_magnitude(frame.samples[k]);
    if (m > best_mag) {
      best_mag = m;
      best = k;
    }
  }
  if (!(best_mag > 0.0)) throw Error(ErrorCode::no_echo, "no echo");

  double offset = 0.0;
  if (opts.parabolic_refine && best > opts.exclude_ringdown && best + 1 < frame.size()) {
    const double ym = sample_magnitude(frame.samples[best - 1]);
    const double yp = sample_magnitude(frame.samples[best + 1]);
    const double denom = ym - 2.0 * best_mag + yp;
    if (denom < 0.0) offset = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
  }

  PeakDetection peak;
  peak.index = best;
  peak.t_peak = (static_cast<double>(best) + offset) / frame.odr_hz;
  peak.magnitude = best_mag;
  peak.phase = sample_phase(frame.samples[best]);
  return peak;
}

inline PeakDetection detect_ground_peak(const IQFrame& frame, std::size_t exclude_ringdown_samples) {
  return detect_ground_peak(frame, PeakOptions{exclude_ringdown_samples, false});
}

}  // namespace usnav
