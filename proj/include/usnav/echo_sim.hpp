#pragma once

// Forward acoustic model: exact two-way ground-reflection geometry and IQ frame
// synthesis with rough-surface and airflow phase disturbances.
//
// Geometry convention: the drone moves along +x, sensor A sits a/2 ahead of the
// drone centre and sensor B a/2 behind it. Both sensors share one time base and
// emit with zero starting phase.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "usnav/common.hpp"
#include "usnav/signal_core.hpp"

namespace usnav {

struct TwoWayGeometry {
  double separation = 0.038;  // a, m
  double height_a = 0.56;     // m
  double height_b = 0.56;     // m
  double velocity = 0.0;      // drone x-velocity, m/s
  double c0 = kDefaultSpeedOfSound;
};

inline void validate(const TwoWayGeometry& g) {
  if (!(g.separation > 0.0) || !(g.height_a > 0.0) || !(g.height_b > 0.0) || !(g.c0 > 0.0) ||
      !(std::abs(g.velocity) < g.c0) || !std::isfinite(g.velocity)) {
    throw Error(ErrorCode::invalid_argument, "invalid two-way geometry");
  }
}

struct PathSolution {
  double length_ab = 0.0;  // l_AB1, total A->ground->B path, m
  double length_ba = 0.0;  // l_BA2, m
  double time_ab = 0.0;    // flight time of the A->B pulse, s
  double time_ba = 0.0;
  double gamma_ab_deg = 90.0;
  double gamma_ba_deg = 90.0;
  double residual = 0.0;  // worst |c0 t - path| at the returned times, m
};

namespace detail {

struct OnePulse {
  double time = 0.0;
  double length = 0.0;
  double gamma_deg = 90.0;
  double residual = 0.0;
};

// Emitter fixed at horizontal position 0 and height h_emit at t = 0. The
// receiver starts at horizontal offset d0 and moves with velocity v. The
// specular path equals the straight line to the receiver's mirror image below
// the ground, so the flight time is the root of c0 t = |(d0 + v t, h_emit + h_recv)|.
inline OnePulse solve_pulse(double d0, double v, double h_emit, double h_recv, double c0) {
  const double vertical = h_emit + h_recv;
  auto path = [&](double t) { return std::hypot(d0 + v * t, vertical); };
  auto f = [&](double t) { return c0 * t - path(t); };

  // f is strictly increasing (slope >= c0 - |v| > 0) and f(0) < 0.
  double lo = 0.0;
  double hi = path(0.0) / (c0 - std::abs(v));
  double t = path(0.0) / c0;
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const double ft = f(t);
    if (ft < 0.0) lo = t; else hi = t;
    const double slope = c0 - v * (d0 + v * t) / path(t);
    double next = t - ft / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-18 + 1e-15 * t) {
      t = next;
      converged = true;
      break;
    }
    t = next;
  }
  const double residual = std::abs(f(t));
  if (!converged && residual > 1e-12) {
    throw Error(ErrorCode::non_convergence, "two-way root finder did not converge, residual " + std::to_string(residual));
  }

  OnePulse out;
  out.time = t;
  out.length = path(t);
  out.residual = residual;

  // Ground point C of the specular path; E and G are the receiver positions at
  // emission and at reception. gamma = 90 deg - angle(ECG)/2.
  const double d_rx = d0 + v * t;
  const double cx = d_rx * h_emit / vertical;
  const double ex = d0 - cx;
  const double gx = d_rx - cx;
  const double angle_ecg = std::abs(std::atan2(ex * h_recv - gx * h_recv, ex * gx + h_recv * h_recv));
  out.gamma_deg = 90.0 - 0.5 * angle_ecg * 180.0 / kPi;
  return out;
}

}  // namespace detail

/// Brute-force oracle for the two-way pulse sequence.
inline PathSolution exact_path_lengths(const TwoWayGeometry& g) {
  validate(g);
  // A -> B: B starts a behind the emitter and closes in. B -> A: A starts a ahead and moves away.
  const auto ab = detail::solve_pulse(-g.separation, g.velocity, g.height_a, g.height_b, g.c0);
  const auto ba = detail::solve_pulse(+g.separation, g.velocity, g.height_b, g.height_a, g.c0);
  PathSolution s;
  s.length_ab = ab.length;
  s.length_ba = ba.length;
  s.time_ab = ab.time;
  s.time_ba = ba.time;
  s.gamma_ab_deg = ab.gamma_deg;
  s.gamma_ba_deg = ba.gamma_deg;
  s.residual = std::max(ab.residual, ba.residual);
  return s;
}

struct EchoSpec {
  double round_trip_time = 0.0;  // s since emission
  double amplitude = 0.0;
  double carrier_phase = 0.0;  // rad
};

struct FrameConfig {
  std::string sensor_id = "A";
  double t_emit = 0.0;
  double f_op_hz = 175e3;
  int odr_divisor = 2;
  std::size_t n_samples = kMaxIqSamples;
  double pulse_width_samples = 8.0;  // full width of the raised-cosine envelope

  double odr_hz() const { return f_op_hz / odr_divisor; }
  double span_s() const { return static_cast<double>(n_samples - 1) / odr_hz(); }
};

struct NoiseSpec {
  double iq_noise_sigma = 0.0;         // ADC counts, per I and Q component
  double roughness_phase_sigma = 0.0;  // rad, independent per frame
  double airflow_drift_sigma = 0.0;    // rad, stationary std of the drift
  double airflow_correlation_s = 0.05;
  std::uint64_t seed = 0;
};

inline void validate(const NoiseSpec& n) {
  if (n.iq_noise_sigma < 0.0 || n.roughness_phase_sigma < 0.0 || n.airflow_drift_sigma < 0.0 ||
      !(n.airflow_correlation_s > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "noise sigmas must be >= 0");
  }
}

/// Slow phase offset from rotor downwash: first-order low-pass filtered
/// Gaussian noise (Ornstein-Uhlenbeck), sampled at increasing times.
class AirflowDrift {
 public:
  AirflowDrift() = default;
  AirflowDrift(double sigma, double correlation_s) : sigma_(sigma), tau_(correlation_s) {}

  double sample(double t, Rng& rng) {
    if (sigma_ == 0.0) return 0.0;
    if (!last_t_) {
      value_ = sigma_ * standard_normal(rng);
    } else {
      const double rho = std::exp(-std::max(0.0, t - *last_t_) / tau_);
      value_ = rho * value_ + sigma_ * std::sqrt(1.0 - rho * rho) * standard_normal(rng);
    }
    last_t_ = t;
    return value_;
  }

 private:
  double sigma_ = 0.0;
  double tau_ = 0.05;
  double value_ = 0.0;
  std::optional<double> last_t_;
};

inline double raised_cosine(double x, double width) {
  if (std::abs(x) >= 0.5 * width) return 0.0;
  return 0.5 * (1.0 + std::cos(kTwoPi * x / width));
}

/// Renders echoes into a baseband frame. `airflow_phase` is added to every
/// echo; roughness jitter is drawn per echo and IQ noise per sample.
inline IQFrame synthesize_frame(std::span<const EchoSpec> echoes, const FrameConfig& cfg, const NoiseSpec& noise,
                                Rng& rng, double airflow_phase = 0.0) {
  validate(noise);
  if (cfg.n_samples == 0 || cfg.n_samples > kMaxIqSamples) {
    throw Error(ErrorCode::invalid_argument, "n_samples must be in [1, 340]");
  }
  IQFrame frame;
  frame.sensor_id = cfg.sensor_id;
  frame.t_emit = cfg.t_emit;
  frame.f_op_hz = cfg.f_op_hz;
  frame.odr_hz = cfg.odr_hz();
  frame.samples.assign(cfg.n_samples, IQSample{});
  validate(frame);

  const double odr = frame.odr_hz;
  const double half = 0.5 * cfg.pulse_width_samples;
  for (const auto& echo : echoes) {
    if (!(echo.round_trip_time >= 0.0) || echo.round_trip_time > cfg.span_s() || echo.amplitude < 0.0) {
      throw Error(ErrorCode::out_of_range, "out of range");
    }
    double phase = echo.carrier_phase + airflow_phase;
    if (noise.roughness_phase_sigma > 0.0) phase += noise.roughness_phase_sigma * standard_normal(rng);
    const double ci = std::cos(phase);
    const double cq = std::sin(phase);
    const double centre = echo.round_trip_time * odr;
    const auto first = static_cast<std::ptrdiff_t>(std::ceil(centre - half));
    const auto last = static_cast<std::ptrdiff_t>(std::floor(centre + half));
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(first, 0);
         k <= std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(cfg.n_samples) - 1); ++k) {
      const double env = echo.amplitude * raised_cosine(static_cast<double>(k) - centre, cfg.pulse_width_samples);
      frame.samples[static_cast<std::size_t>(k)].i += env * ci;
      frame.samples[static_cast<std::size_t>(k)].q += env * cq;
    }
  }
  if (noise.iq_noise_sigma > 0.0) {
    for (auto& s : frame.samples) {
      s.i += noise.iq_noise_sigma * standard_normal(rng);
      s.q += noise.iq_noise_sigma * standard_normal(rng);
    }
  }
  return frame;
}

/// Seeds a generator from noise.seed.
inline IQFrame synthesize_frame(std::span<const EchoSpec> echoes, const FrameConfig& cfg, const NoiseSpec& noise) {
  Rng rng = make_stream(noise.seed, "frame");
  return synthesize_frame(echoes, cfg, noise, rng);
}

/// Baseband phase of a carrier that travelled `path_m`.
inline double propagation_phase(double path_m, double f_op_hz, double c0) {
  return wrap_phase(-kTwoPi * f_op_hz * (path_m / c0));
}

struct PairConfig {
  double t_emit = 0.0;
  double f_op_hz = 175e3;
  int odr_divisor = 2;
  std::size_t n_samples = kMaxIqSamples;
  double pulse_width_samples = 8.0;
  double amplitude = 1000.0;
};

struct TwoWayFrames {
  IQFrame a_to_b;  // received at B
  IQFrame b_to_a;  // received at A
  PathSolution paths;
};

/// One A->B / B->A pulse sequence. B fires as soon as it has received A's
/// pulse. Both frames draw from the same airflow drift process.
inline TwoWayFrames simulate_two_way_pair(const TwoWayGeometry& g, const PairConfig& cfg, const NoiseSpec& noise,
                                          Rng& rng, AirflowDrift& drift) {
  const PathSolution paths = exact_path_lengths(g);

  FrameConfig fc;
  fc.f_op_hz = cfg.f_op_hz;
  fc.odr_divisor = cfg.odr_divisor;
  fc.n_samples = cfg.n_samples;
  fc.pulse_width_samples = cfg.pulse_width_samples;

  TwoWayFrames out;
  out.paths = paths;

  fc.sensor_id = "B";
  fc.t_emit = cfg.t_emit;
  const EchoSpec echo_ab{paths.time_ab, cfg.amplitude, propagation_phase(paths.length_ab, cfg.f_op_hz, g.c0)};
  const double drift_ab = drift.sample(cfg.t_emit + paths.time_ab, rng);
  out.a_to_b = synthesize_frame(std::span(&echo_ab, 1), fc, noise, rng, drift_ab);

  fc.sensor_id = "A";
  fc.t_emit = cfg.t_emit + paths.time_ab;
  const EchoSpec echo_ba{paths.time_ba, cfg.amplitude, propagation_phase(paths.length_ba, cfg.f_op_hz, g.c0)};
  const double drift_ba = drift.sample(fc.t_emit + paths.time_ba, rng);
  out.b_to_a = synthesize_frame(std::span(&echo_ba, 1), fc, noise, rng, drift_ba);
  return out;
}

inline TwoWayFrames simulate_two_way_pair(const TwoWayGeometry& g, const PairConfig& cfg, const NoiseSpec& noise) {
  Rng rng = make_stream(noise.seed, "pair");
  AirflowDrift drift(noise.airflow_drift_sigma, noise.airflow_correlation_s);
  return simulate_two_way_pair(g, cfg, noise, rng, drift);
}

}  // namespace usnav
