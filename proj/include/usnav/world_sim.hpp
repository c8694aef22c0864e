#pragma once

// Planar world with material-tagged segment obstacles, forward range sensing
// for both modalities, drone kinematics and crash detection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "usnav/common.hpp"
#include "usnav/echo_sim.hpp"
#include "usnav/material.hpp"
#include "usnav/sensor_models.hpp"

namespace usnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

struct Segment {
  Vec2 a;
  Vec2 b;
};

/// Distance along the ray origin + s * dir (|dir| = 1) to the segment, if hit.
inline std::optional<double> ray_segment_distance(Vec2 origin, Vec2 dir, const Segment& seg) {
  const Vec2 e = seg.b - seg.a;
  const double denom = cross(dir, e);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const Vec2 w = seg.a - origin;
  const double s = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (s < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return s;
}

inline double point_segment_distance(Vec2 p, const Segment& seg) {
  const Vec2 e = seg.b - seg.a;
  const double len2 = dot(e, e);
  const double u = len2 > 0.0 ? std::clamp(dot(p - seg.a, e) / len2, 0.0, 1.0) : 0.0;
  return norm(p - (seg.a + u * e));
}

struct Obstacle {
  std::vector<Segment> segments;
  Material material;
};

struct World {
  std::vector<Obstacle> obstacles;
};

inline void validate(const World& w) {
  for (const auto& o : w.obstacles) {
    validate(o.material);
    for (const auto& s : o.segments) {
      if (!std::isfinite(s.a.x) || !std::isfinite(s.a.y) || !std::isfinite(s.b.x) || !std::isfinite(s.b.y)) {
        throw Error(ErrorCode::invalid_argument, "segment has non-finite endpoints");
      }
      if (norm(s.b - s.a) <= 0.0) throw Error(ErrorCode::invalid_argument, "degenerate segment");
    }
  }
}

struct DroneState2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double v_forward = 0.0;
  double h = 0.5;
  double t = 0.0;
};

struct OACommand {
  double v_forward = 0.0;
  double yaw_rate = 0.0;
};

struct KinematicsParams {
  double velocity_time_constant = 0.2;  // s, first-order lag toward the commanded speed
};

struct StepResult {
  DroneState2D state;
  double distance = 0.0;  // path length travelled during the step
};

/// Exact integration of the first-order speed lag; heading for the translation
/// is taken at the middle of the step.
inline StepResult step_with_distance(const DroneState2D& s, const OACommand& cmd, double dt,
                                     const KinematicsParams& kin = {}) {
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  StepResult r;
  r.state = s;
  const double tau = kin.velocity_time_constant;
  double v_end = cmd.v_forward;
  double travelled = cmd.v_forward * dt;
  if (tau > 0.0) {
    const double decay = std::exp(-dt / tau);
    v_end = cmd.v_forward + (s.v_forward - cmd.v_forward) * decay;
    travelled = cmd.v_forward * dt + (s.v_forward - cmd.v_forward) * tau * (1.0 - decay);
  }
  const double heading = s.yaw + 0.5 * cmd.yaw_rate * dt;
  r.state.x += travelled * std::cos(heading);
  r.state.y += travelled * std::sin(heading);
  r.state.yaw = s.yaw + cmd.yaw_rate * dt;
  r.state.v_forward = v_end;
  r.state.t = s.t + dt;
  r.distance = std::abs(travelled);
  return r;
}

inline DroneState2D step(const DroneState2D& s, const OACommand& cmd, double dt, const KinematicsParams& kin = {}) {
  return step_with_distance(s, cmd, dt, kin).state;
}

struct CrashRecord {
  std::string material;
  double clearance = 0.0;
};

inline constexpr double kDefaultDroneRadius = 0.06;

/// Crash when any segment is strictly closer than the drone radius; reports the nearest.
inline std::optional<CrashRecord> check_crash(const DroneState2D& s, const World& w,
                                              double drone_radius = kDefaultDroneRadius) {
  std::optional<CrashRecord> hit;
  const Vec2 p{s.x, s.y};
  for (const auto& o : w.obstacles) {
    for (const auto& seg : o.segments) {
      const double d = point_segment_distance(p, seg);
      if (d < drone_radius && (!hit || d < hit->clearance)) hit = CrashRecord{o.material.name, d};
    }
  }
  return hit;
}

struct ConeHit {
  double distance = 0.0;
  double off_axis = 0.0;  // rad from boresight
  const Obstacle* obstacle = nullptr;
};

/// Nearest hit per segment over a fan of rays; each ray stops at its first
/// surface unless `skip` says the surface is transparent to this modality.
template <typename SkipFn>
std::vector<ConeHit> cast_cone(Vec2 origin, double boresight, double fov_deg, double max_range, const World& w,
                               SkipFn skip, double ray_step_deg = 0.5) {
  const double half = 0.5 * fov_deg * kPi / 180.0;
  const int n = std::max(1, static_cast<int>(std::ceil(fov_deg / ray_step_deg)));
  std::map<std::pair<std::size_t, std::size_t>, ConeHit> best;
  for (int r = 0; r <= n; ++r) {
    const double off = -half + 2.0 * half * r / n;
    const Vec2 dir{std::cos(boresight + off), std::sin(boresight + off)};
    std::optional<std::pair<std::size_t, std::size_t>> key;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t oi = 0; oi < w.obstacles.size(); ++oi) {
      if (skip(w.obstacles[oi].material)) continue;
      for (std::size_t si = 0; si < w.obstacles[oi].segments.size(); ++si) {
        if (auto d = ray_segment_distance(origin, dir, w.obstacles[oi].segments[si]); d && *d < nearest) {
          nearest = *d;
          key = {oi, si};
        }
      }
    }
    if (!key || nearest > max_range) continue;
    auto it = best.find(*key);
    if (it == best.end() || nearest < it->second.distance) {
      best[*key] = ConeHit{nearest, off, &w.obstacles[key->first]};
    }
  }
  std::vector<ConeHit> hits;
  hits.reserve(best.size());
  for (const auto& [k, h] : best) hits.push_back(h);
  return hits;
}

struct UltrasonicEchoModel {
  double amplitude_scale = 1000.0;  // counts at 1 m for a perfect reflector on axis
  double edge_fraction = 0.2;       // outer part of the cone with reduced response
  double pulse_width_samples = 8.0;
};

/// Linear ramp from 0 at (1 - edge_fraction) of the half-angle to 1 at the cone edge.
inline double edge_penalty(double off_axis, double half_angle, double edge_fraction) {
  const double inner = (1.0 - edge_fraction) * half_angle;
  if (std::abs(off_axis) <= inner || edge_fraction <= 0.0) return 0.0;
  return std::clamp((std::abs(off_axis) - inner) / (half_angle - inner), 0.0, 1.0);
}

inline std::vector<EchoSpec> ultrasonic_echoes(const DroneState2D& s, const World& w, const UltrasonicSensorSpec& spec,
                                               double c0, const UltrasonicEchoModel& model = {}) {
  const Vec2 origin{s.x + spec.mount.x * std::cos(s.yaw) - spec.mount.y * std::sin(s.yaw),
                    s.y + spec.mount.x * std::sin(s.yaw) + spec.mount.y * std::cos(s.yaw)};
  const double half = 0.5 * spec.fov_deg * kPi / 180.0;
  const double bin = 1.0 / spec.odr_hz();
  const double span = static_cast<double>(spec.n_samples - 1) * bin;
  const auto hits = cast_cone(origin, s.yaw + spec.mount.yaw, spec.fov_deg, spec.effective_range_m(c0), w,
                              [](const Material&) { return false; });
  std::vector<EchoSpec> echoes;
  for (const auto& h : hits) {
    const double d = std::max(h.distance, 1e-3);
    const double rtt = 2.0 * d / c0;
    if (rtt > span) continue;
    const auto& m = h.obstacle->material;
    const double amp = model.amplitude_scale * m.acoustic_reflectivity *
                       (1.0 - m.softness * edge_penalty(h.off_axis, half, model.edge_fraction)) / (d * d);
    echoes.push_back({rtt, amp, wrap_phase(-kTwoPi * spec.f_op_hz * rtt)});
  }
  std::sort(echoes.begin(), echoes.end(),
            [](const EchoSpec& a, const EchoSpec& b) { return a.round_trip_time < b.round_trip_time; });
  return echoes;
}

/// Forward-facing ultrasonic measurement: every surface in the cone echoes,
/// glass included.
inline IQFrame sense_ultrasonic(const DroneState2D& s, const World& w, const UltrasonicSensorSpec& spec,
                                const NoiseSpec& noise, Rng& rng, double c0 = kDefaultSpeedOfSound,
                                const UltrasonicEchoModel& model = {}) {
  const auto echoes = ultrasonic_echoes(s, w, spec, c0, model);
  FrameConfig fc;
  fc.sensor_id = spec.name;
  fc.t_emit = s.t;
  fc.f_op_hz = spec.f_op_hz;
  fc.odr_divisor = spec.odr_divisor;
  fc.n_samples = spec.n_samples;
  fc.pulse_width_samples = model.pulse_width_samples;
  return synthesize_frame(echoes, fc, noise, rng);
}

/// Laser ToF: nearest optically visible surface in the narrow cone; glass and
/// black surfaces let the beam through. nullopt means no return.
inline std::optional<double> sense_laser(const DroneState2D& s, const World& w, const LaserToFSpec& spec, Rng& rng,
                                         double mount_yaw = 0.0) {
  const auto hits = cast_cone({s.x, s.y}, s.yaw + mount_yaw, spec.fov_deg, spec.max_range_m, w,
                              [](const Material& m) { return !m.optical_tof_visible; });
  std::optional<double> nearest;
  for (const auto& h : hits) {
    if (!nearest || h.distance < *nearest) nearest = h.distance;
  }
  if (nearest && spec.range_noise_sigma_m > 0.0) *nearest += spec.range_noise_sigma_m * standard_normal(rng);
  return nearest;
}

struct Pose {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

struct RunMetrics {
  double duration_s = 0.0;
  double distance_m = 0.0;
  bool crashed = false;
  std::optional<std::string> crash_cause;
  std::vector<Pose> trajectory;
};

}  // namespace usnav
