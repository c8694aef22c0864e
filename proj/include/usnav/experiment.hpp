#pragma once

// Seeded experiment orchestration: obstacle-avoidance exploration runs and the
// 1-D velocity benchmark, plus their CSV/summary emission.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "usnav/config.hpp"
#include "usnav/echo_sim.hpp"
#include "usnav/fusion.hpp"
#include "usnav/iq_log.hpp"
#include "usnav/oa_policy.hpp"
#include "usnav/sensor_models.hpp"
#include "usnav/velocity_estimator.hpp"
#include "usnav/world_sim.hpp"

namespace usnav {

// ---------------------------------------------------------------------------
// Obstacle avoidance

struct TraceRow {
  double t = 0.0;
  std::optional<double> d;
  double v_forward = 0.0;
  double yaw_rate = 0.0;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

struct OARun {
  int run_id = 0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::vector<TraceRow> trace;
};

struct OAReport {
  std::string scene;
  OASensor sensor = OASensor::ultrasonic;
  std::vector<OARun> runs;
  double control_rate_hz = 0.0;
  double sensor_power_mw = 0.0;

  double mean_time_s() const {
    double s = 0.0;
    for (const auto& r : runs) s += r.metrics.duration_s;
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
  }
  double mean_distance_m() const {
    double s = 0.0;
    for (const auto& r : runs) s += r.metrics.distance_m;
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
  }
  double crash_rate() const {
    if (runs.empty()) return 0.0;
    return static_cast<double>(std::count_if(runs.begin(), runs.end(), [](const OARun& r) { return r.metrics.crashed; })) /
           static_cast<double>(runs.size());
  }
  double success_rate() const { return runs.empty() ? 0.0 : 1.0 - crash_rate(); }
};

struct OARunParams {
  OAConfig oa;
  UltrasonicSensorSpec ultrasonic = icu30201(4);
  LaserToFSpec laser;
  KinematicsParams kinematics;
  UltrasonicEchoModel echo_model;
  double iq_noise_sigma = 2.0;
  double drone_radius = kDefaultDroneRadius;
  double max_duration_s = 120.0;
  double c0 = kDefaultSpeedOfSound;
  int calibration_frames = 8;
};

/// One exploration flight. Randomness comes only from `seed` through the
/// "world", "noise" and "policy" sub-streams.
inline OARun run_oa_once(const Scene& scene, const OARunParams& p, OASensor sensor, int run_id, std::uint64_t seed) {
  Rng world_rng = make_stream(seed, "world");
  Rng noise_rng = make_stream(seed, "noise");
  OAPolicy policy(p.oa, make_stream(seed, "policy"));

  DroneState2D s;
  s.h = scene.height;
  s.x = scene.start.x + (scene.start.position_jitter > 0.0 ? uniform(world_rng, -1.0, 1.0) * scene.start.position_jitter : 0.0);
  s.y = scene.start.y + (scene.start.position_jitter > 0.0 ? uniform(world_rng, -1.0, 1.0) * scene.start.position_jitter : 0.0);
  s.yaw = scene.start.yaw ? *scene.start.yaw : uniform(world_rng, -kPi, kPi);

  NoiseSpec noise;
  noise.iq_noise_sigma = p.iq_noise_sigma;

  double noise_floor = 0.0;
  if (sensor == OASensor::ultrasonic && p.calibration_frames > 0) {
    std::vector<IQFrame> quiet;
    FrameConfig fc;
    fc.f_op_hz = p.ultrasonic.f_op_hz;
    fc.odr_divisor = p.ultrasonic.odr_divisor;
    fc.n_samples = p.ultrasonic.n_samples;
    for (int k = 0; k < p.calibration_frames; ++k) quiet.push_back(synthesize_frame({}, fc, noise, noise_rng));
    noise_floor = calibrate_noise_floor(quiet);
  }

  const double dt = oa_cycle_time(p.ultrasonic, p.c0).total_s;
  OARun run;
  run.run_id = run_id;
  run.seed = seed;
  auto& m = run.metrics;
  m.trajectory.push_back({s.t, s.x, s.y, s.yaw});

  while (s.t < p.max_duration_s) {
    std::optional<double> d;
    if (sensor == OASensor::ultrasonic) {
      const IQFrame frame = sense_ultrasonic(s, scene.world, p.ultrasonic, noise, noise_rng, p.c0, p.echo_model);
      d = nearest_obstacle_distance(frame, p.oa, p.c0, noise_floor);
    } else {
      d = sense_laser(s, scene.world, p.laser, noise_rng);
    }
    const OACommand cmd = policy.control(d, s.t);
    run.trace.push_back({s.t, d, cmd.v_forward, cmd.yaw_rate, s.x, s.y, s.yaw});

    const auto next = step_with_distance(s, cmd, dt, p.kinematics);
    s = next.state;
    m.distance_m += next.distance;
    m.trajectory.push_back({s.t, s.x, s.y, s.yaw});
    if (auto crash = check_crash(s, scene.world, p.drone_radius)) {
      m.crashed = true;
      m.crash_cause = crash->material;
      break;
    }
  }
  m.duration_s = s.t;
  return run;
}

inline OARunParams oa_params_from(const ExperimentConfig& cfg) {
  OARunParams p;
  p.oa = cfg.oa;
  p.max_duration_s = cfg.max_duration_s;
  p.iq_noise_sigma = cfg.noise_iq_sigma;
  return p;
}

inline std::uint64_t run_seed(std::uint64_t base, int run_id) { return base + static_cast<std::uint64_t>(run_id); }

inline OAReport run_oa_experiment(const ExperimentConfig& cfg, const Scene& scene) {
  validate(cfg);
  const OARunParams p = oa_params_from(cfg);
  OAReport report;
  report.scene = scene.name;
  report.sensor = cfg.sensor;
  report.control_rate_hz = oa_cycle_time(p.ultrasonic, p.c0).rate_hz;
  report.sensor_power_mw = cfg.sensor == OASensor::ultrasonic ? p.ultrasonic.power_mw : p.laser.power_mw;
  for (int k = 0; k < cfg.n_runs; ++k) {
    report.runs.push_back(run_oa_once(scene, p, cfg.sensor, k, run_seed(cfg.seed, k)));
  }
  return report;
}

inline OAReport run_oa_experiment(const ExperimentConfig& cfg) {
  if (cfg.scenario.empty()) throw Error(ErrorCode::config, "no scenario given");
  if (!std::filesystem::exists(cfg.scenario)) throw Error(ErrorCode::config, "scene file not found: " + cfg.scenario.string());
  return run_oa_experiment(cfg, load_scene(cfg.scenario));
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

inline void write_runs_csv(std::ostream& out, const OAReport& r) {
  out << "run_id,seed,time_s,crashed,crash_cause,distance_m\n";
  for (const auto& run : r.runs) {
    fmt::print(out, "{},{},{},{},{},{}\n", run.run_id, run.seed, run.metrics.duration_s, run.metrics.crashed ? 1 : 0,
               run.metrics.crash_cause.value_or(""), run.metrics.distance_m);
  }
}

inline void write_trace_csv(std::ostream& out, const OARun& run) {
  out << "t,d,v_forward,yaw_rate,x,y,yaw\n";
  for (const auto& row : run.trace) {
    fmt::print(out, "{},{},{},{},{},{},{}\n", row.t, fmt_opt(row.d), row.v_forward, row.yaw_rate, row.x, row.y, row.yaw);
  }
}

inline void write_oa_summary(std::ostream& out, const OAReport& r) {
  fmt::print(out, "scene: {}\nsensor: {}\nruns: {}\ncontrol rate: {:.1f} Hz\nsensor power: {:.1f} mW\n", r.scene,
             to_string(r.sensor), r.runs.size(), r.control_rate_hz, r.sensor_power_mw);
  fmt::print(out, "{:>6} {:>10} {:>6} {:>14} {:>12}\n", "Exp.", "Time [s]", "Crash", "Cause", "Distance [m]");
  for (const auto& run : r.runs) {
    fmt::print(out, "{:>6} {:>10.1f} {:>6} {:>14} {:>12.2f}\n", fmt::format("({})", run.run_id + 1), run.metrics.duration_s,
               run.metrics.crashed ? "yes" : "no", run.metrics.crash_cause.value_or("-"), run.metrics.distance_m);
  }
  fmt::print(out, "{:>6} {:>10.1f} {:>5.0f}% {:>14} {:>12.2f}\n", "Avg", r.mean_time_s(), 100.0 * r.crash_rate(), "",
             r.mean_distance_m());
}

// ---------------------------------------------------------------------------
// Velocity benchmark

/// Ground-truth motion sampled on a fixed grid.
class VelocityProfile {
 public:
  VelocityProfile(const VelocityProfileConfig& cfg, double duration_s, double dt, Rng& rng) : dt_(dt) {
    const auto n = static_cast<std::size_t>(std::ceil(duration_s / dt)) + 2;
    v_.resize(n);
    a_.resize(n);
    x_.resize(n);
    if (cfg.kind == ProfileKind::sinusoid) {
      const double w = kTwoPi * cfg.frequency_hz;
      for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        v_[k] = cfg.amplitude * std::sin(w * t);
        a_[k] = cfg.amplitude * w * std::cos(w * t);
        x_[k] = cfg.amplitude / w * (1.0 - std::cos(w * t));
      }
    } else {
      // Mean-reverting acceleration, velocity kept inside +-v_limit.
      double a = 0.0;
      double v = 0.0;
      double x = 0.0;
      const double tau = 0.5;
      const double rho = std::exp(-dt / tau);
      for (std::size_t k = 0; k < n; ++k) {
        v_[k] = v;
        a_[k] = a;
        x_[k] = x;
        a = rho * a + cfg.accel_sigma * std::sqrt(1.0 - rho * rho) * standard_normal(rng);
        if (std::abs(v) > 0.9 * cfg.v_limit && a * v > 0.0) a = -a;
        x += v * dt + 0.5 * a * dt * dt;
        v += a * dt;
      }
    }
  }

  double v(double t) const { return interp(v_, t); }
  double accel(double t) const { return interp(a_, t); }
  double position(double t) const { return interp(x_, t); }
  double rms() const {
    double s = 0.0;
    for (double x : v_) s += x * x;
    return std::sqrt(s / static_cast<double>(v_.size()));
  }

 private:
  double interp(const std::vector<double>& y, double t) const {
    const double u = std::clamp(t / dt_, 0.0, static_cast<double>(y.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(u), y.size() - 2);
    const double f = u - static_cast<double>(k);
    return y[k] + f * (y[k + 1] - y[k]);
  }

  double dt_;
  std::vector<double> v_, a_, x_;
};

/// One row of a velocity track; raw ultrasonic rows carry the phase diagnostics.
struct TrackSample {
  std::string source;
  double t = 0.0;
  double v = 0.0;
  double v_true = 0.0;
  std::optional<double> delta_rad;
  std::optional<double> delta_m;
  std::optional<double> t1;
  std::optional<VelocityMethod> method;
  bool valid = true;
  std::optional<RejectReason> reject_reason;
};

struct StreamStats {
  std::string stream;
  std::size_t n_total = 0;
  std::size_t n_valid = 0;
  double mse = 0.0;
  double mse_moving_avg = 0.0;
};

struct VelocityReport {
  std::string preset;
  VelocityMethod method = VelocityMethod::approx;
  double height = 0.0;
  double ultrasonic_rate_hz = 0.0;
  double flow_rate_hz = 0.0;
  PowerBudget power;
  std::vector<TrackSample> samples;
  std::vector<StreamStats> stats;

  const StreamStats& stream(std::string_view name) const {
    for (const auto& s : stats) {
      if (s.stream == name) return s;
    }
    throw Error(ErrorCode::invalid_argument, "no stream " + std::string(name));
  }
};

inline constexpr std::size_t kMovingAverageWindow = 11;

/// Mean squared error over valid samples of one stream, raw and after a
/// centred moving average.
inline StreamStats stream_stats(const std::vector<TrackSample>& samples, const std::string& stream) {
  StreamStats st;
  st.stream = stream;
  std::vector<const TrackSample*> valid;
  for (const auto& s : samples) {
    if (s.source != stream) continue;
    ++st.n_total;
    if (s.valid) valid.push_back(&s);
  }
  st.n_valid = valid.size();
  if (valid.empty()) {
    st.mse = st.mse_moving_avg = std::nan("");
    return st;
  }
  double sum = 0.0;
  for (const auto* s : valid) sum += (s->v - s->v_true) * (s->v - s->v_true);
  st.mse = sum / static_cast<double>(valid.size());

  const std::size_t half = kMovingAverageWindow / 2;
  double sum_ma = 0.0;
  for (std::size_t k = 0; k < valid.size(); ++k) {
    const std::size_t lo = k >= half ? k - half : 0;
    const std::size_t hi = std::min(valid.size() - 1, k + half);
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += valid[j]->v;
    const double avg = acc / static_cast<double>(hi - lo + 1);
    sum_ma += (avg - valid[k]->v_true) * (avg - valid[k]->v_true);
  }
  st.mse_moving_avg = sum_ma / static_cast<double>(valid.size());
  return st;
}

struct VelocityBenchParams {
  SurfacePreset preset;
  double duration_s = 30.0;
  double height = 0.56;
  VelocityProfileConfig profile;
  double c0 = kDefaultSpeedOfSound;
  UltrasonicSensorSpec ultrasonic = icu10201(2);
  OpticalFlowSpec flow;
  double separation = 0.038;
  double echo_amplitude = 1000.0;
  double imu_dt = 1e-3;
  ProcessNoise imu_noise{0.05, 0.01};
  double imu_initial_bias = 0.02;
  double fused_output_dt = 0.01;
};

inline VelocityBenchParams velocity_params_from(const ExperimentConfig& cfg, const SurfacePreset& preset) {
  VelocityBenchParams p;
  p.preset = preset;
  p.duration_s = cfg.bench_duration_s;
  p.height = cfg.bench_height;
  p.profile = cfg.profile;
  return p;
}

/// Measurement variances handed to the filter, derived from the preset's noise model.
struct MeasurementVariances {
  double ultrasonic = 0.0;
  double flow = 0.0;
};

inline MeasurementVariances measurement_variances(const VelocityBenchParams& p, double v_rms) {
  const auto& n = p.preset.noise;
  const double lambda = wavelength(p.ultrasonic.f_op_hz, p.c0);
  const double k_us = lambda / kTwoPi * p.c0 / (2.0 * p.separation);
  const double pulse_gap = 2.0 * p.height / p.c0;
  const double rho_air = std::exp(-pulse_gap / n.airflow_correlation_s);
  const double phase_iq = n.iq_noise_sigma / p.echo_amplitude;
  const double var_phase = 2.0 * n.roughness_phase_sigma * n.roughness_phase_sigma +
                           2.0 * n.airflow_drift_sigma * n.airflow_drift_sigma * (1.0 - rho_air) +
                           2.0 * phase_iq * phase_iq;

  const double k_flow = p.height / (p.flow.focal_scale * p.flow.frame_period_s());
  const double rho = p.preset.feature_density;
  const double sigma_px = p.flow.noise_sigma_px * (1.0 - rho);
  const double tracking_loss = 1.0 - p.flow.feature_sensitivity(rho);
  const double var_flow = k_flow * k_flow * (sigma_px * sigma_px + p.flow.pixel_quantum * p.flow.pixel_quantum / 12.0) +
                          tracking_loss * tracking_loss * v_rms * v_rms;
  return {std::max(var_phase * k_us * k_us, 1e-6), std::max(var_flow, 1e-6)};
}

/// `iq_log`, when given, receives every simulated pulse pair as JSON lines.
inline VelocityReport run_velocity_benchmark(const VelocityBenchParams& p, std::uint64_t seed,
                                             std::ostream* iq_log = nullptr) {
  Rng profile_rng = make_stream(seed, "profile");
  Rng us_rng = make_stream(seed, "noise");
  Rng flow_rng = make_stream(seed, "flow");
  Rng imu_rng = make_stream(seed, "imu");

  const VelocityProfile gt(p.profile, p.duration_s, p.imu_dt, profile_rng);
  const auto var = measurement_variances(p, gt.rms());
  AirflowDrift drift(p.preset.noise.airflow_drift_sigma, p.preset.noise.airflow_correlation_s);

  EstimatorConfig est_cfg;
  est_cfg.separation = p.separation;
  est_cfg.c0 = p.c0;
  est_cfg.method = p.preset.method;
  EstimatorConfig alt_cfg = est_cfg;
  alt_cfg.method = p.preset.method == VelocityMethod::exact ? VelocityMethod::approx : VelocityMethod::exact;
  const std::string alt_name = std::string("ultrasonic_") + std::string(to_string(alt_cfg.method));

  PairConfig pair_cfg;
  pair_cfg.f_op_hz = p.ultrasonic.f_op_hz;
  pair_cfg.odr_divisor = p.ultrasonic.odr_divisor;
  pair_cfg.n_samples = p.ultrasonic.n_samples;
  pair_cfg.amplitude = p.echo_amplitude;

  Material surface;
  surface.feature_density = p.preset.feature_density;

  VelocityReport report;
  report.preset = p.preset.name;
  report.method = p.preset.method;
  report.height = p.height;
  const double pair_period = velocity_cycle_time(p.height, p.c0, p.ultrasonic.comm_overhead_s);
  report.ultrasonic_rate_hz = 1.0 / pair_period;
  report.flow_rate_hz = p.flow.fps;
  report.power = power_budget(icu30201(4), p.ultrasonic, LaserToFSpec{}, p.flow);

  FusionState fused;
  fused.covariance = Eigen::Matrix2d::Identity() * 0.01;
  FusionState fused_flow = fused;
  double imu_bias = p.imu_initial_bias;

  const double flow_period = p.flow.frame_period_s();
  double next_pair = 0.0;
  double next_flow = flow_period;
  double next_out = 0.0;
  const auto n_steps = static_cast<std::size_t>(std::llround(p.duration_s / p.imu_dt));

  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * p.imu_dt;
    const double t_mid = t - 0.5 * p.imu_dt;
    imu_bias += p.imu_noise.bias_walk_sigma * std::sqrt(p.imu_dt) * standard_normal(imu_rng);
    const double accel_meas = gt.accel(t_mid) + imu_bias + p.imu_noise.accel_sigma * standard_normal(imu_rng);
    fused = predict(fused, accel_meas, p.imu_dt, p.imu_noise);
    fused_flow = predict(fused_flow, accel_meas, p.imu_dt, p.imu_noise);

    if (t + 1e-12 >= next_flow) {
      const double disp = gt.position(t) - gt.position(t - flow_period);
      const FlowReading reading = optical_flow_reading(disp, p.height, p.flow, surface, flow_rng);
      const double v_flow = flow_to_velocity(reading, p.height, p.flow);
      const double t_meas = t - 0.5 * flow_period;
      report.samples.push_back({"optical_flow", t_meas, v_flow, gt.v(t_meas), {}, {}, {}, {}, true, {}});
      fused = update(fused, v_flow, var.flow);
      fused_flow = update(fused_flow, v_flow, var.flow);
      next_flow += flow_period;
    }

    if (t + 1e-12 >= next_pair) {
      TwoWayGeometry g;
      g.separation = p.separation;
      g.height_a = g.height_b = p.height;
      g.velocity = gt.v(t);
      g.c0 = p.c0;
      pair_cfg.t_emit = t;
      const auto frames = simulate_two_way_pair(g, pair_cfg, p.preset.noise, us_rng, drift);
      if (iq_log) {
        write_frame(*iq_log, frames.a_to_b);
        write_frame(*iq_log, frames.b_to_a);
      }
      const auto est = estimate(frames.a_to_b, frames.b_to_a, est_cfg);
      const auto alt = estimate(frames.a_to_b, frames.b_to_a, alt_cfg);
      report.samples.push_back({"ultrasonic", t, est.v, g.velocity, est.delta_rad, est.delta_m, est.t1, est.method,
                                est.valid, est.reject_reason});
      report.samples.push_back({alt_name, t, alt.v, g.velocity, alt.delta_rad, alt.delta_m, alt.t1, alt.method,
                                alt.valid, alt.reject_reason});
      fused = update(fused, est.v, var.ultrasonic, est.valid);
      next_pair += pair_period;
    }

    if (t + 1e-12 >= next_out) {
      report.samples.push_back({"fused", t, fused.v, gt.v(t), {}, {}, {}, {}, true, {}});
      report.samples.push_back({"fused_flow", t, fused_flow.v, gt.v(t), {}, {}, {}, {}, true, {}});
      report.samples.push_back({"gt", t, gt.v(t), gt.v(t), {}, {}, {}, {}, true, {}});
      next_out += p.fused_output_dt;
    }
  }

  for (const auto* name : {"ultrasonic", "optical_flow", "fused", "fused_flow"}) {
    report.stats.push_back(stream_stats(report.samples, name));
  }
  report.stats.push_back(stream_stats(report.samples, alt_name));
  return report;
}

inline PresetTable load_presets(const ExperimentConfig& cfg) {
  if (cfg.presets_file.empty()) throw Error(ErrorCode::config, "no presets file given");
  if (!std::filesystem::exists(cfg.presets_file)) {
    throw Error(ErrorCode::config, "presets file not found: " + cfg.presets_file.string());
  }
  return presets_from_json(load_json(cfg.presets_file));
}

inline VelocityReport run_velocity_benchmark(const ExperimentConfig& cfg, std::ostream* iq_log = nullptr) {
  validate(cfg);
  const auto presets = load_presets(cfg);
  auto it = presets.find(cfg.preset);
  if (it == presets.end()) throw Error(ErrorCode::config, "unknown preset '" + cfg.preset + "'");
  return run_velocity_benchmark(velocity_params_from(cfg, it->second), cfg.seed, iq_log);
}

inline constexpr const char* kTrackHeader = "source,t,v,v_true,delta_rad,delta_m,t1,method,valid,reject_reason\n";

inline void write_track_row(std::ostream& out, const TrackSample& s) {
  fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", s.source, s.t, s.v, s.v_true, fmt_opt(s.delta_rad),
             fmt_opt(s.delta_m), fmt_opt(s.t1), s.method ? to_string(*s.method) : "", s.valid ? 1 : 0,
             s.reject_reason ? to_string(*s.reject_reason) : "");
}

inline void write_tracks_csv(std::ostream& out, const VelocityReport& r) {
  out << kTrackHeader;
  for (const auto& s : r.samples) write_track_row(out, s);
}

inline void write_mse_csv(std::ostream& out, const VelocityReport& r) {
  out << "stream,n_total,n_valid,mse,mse_moving_avg\n";
  for (const auto& s : r.stats) fmt::print(out, "{},{},{},{},{}\n", s.stream, s.n_total, s.n_valid, s.mse, s.mse_moving_avg);
}

inline void write_velocity_summary(std::ostream& out, const VelocityReport& r) {
  fmt::print(out, "preset: {}\nestimator method: {}\nheight: {} m\n", r.preset, to_string(r.method), r.height);
  fmt::print(out, "ultrasonic pair rate: {:.1f} Hz, optical flow rate: {:.0f} Hz\n", r.ultrasonic_rate_hz, r.flow_rate_hz);
  fmt::print(out, "power: ultrasonic velocity {:.1f} mW, optical flow + ToF {:.0f} mW\n", r.power.ultrasonic_velocity_mw,
             r.power.optical_flow_mw);
  fmt::print(out, "{:<20} {:>8} {:>8} {:>12} {:>14}\n", "Method", "n", "valid", "MSE", "MSE (mov.avg)");
  for (const auto& s : r.stats) {
    fmt::print(out, "{:<20} {:>8} {:>8} {:>12.5f} {:>14.5f}\n", s.stream, s.n_total, s.n_valid, s.mse, s.mse_moving_avg);
  }
}

// ---------------------------------------------------------------------------
// Replay of recorded IQ logs

inline void write_estimate_row(std::ostream& out, double t, const VelocityEstimate& e) {
  TrackSample s{"ultrasonic", t, e.v, std::nan(""), e.delta_rad, e.delta_m, e.t1, e.method, e.valid, e.reject_reason};
  fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", s.source, s.t, s.v, fmt_opt(s.delta_rad), fmt_opt(s.delta_m),
             fmt_opt(s.t1), to_string(*s.method), s.valid ? 1 : 0, s.reject_reason ? to_string(*s.reject_reason) : "");
}

/// Frames received at B ("B") followed by frames received at A ("A") form velocity pairs.
inline std::size_t replay_velocity(const std::vector<IQFrame>& frames, const EstimatorConfig& cfg, std::ostream& out) {
  out << "source,t,v,delta_rad,delta_m,t1,method,valid,reject_reason\n";
  std::size_t pairs = 0;
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    if (frames[k].sensor_id == "B" && frames[k + 1].sensor_id == "A") {
      write_estimate_row(out, frames[k].t_emit, estimate(frames[k], frames[k + 1], cfg));
      ++pairs;
      ++k;
    }
  }
  return pairs;
}

inline void replay_oa(const std::vector<IQFrame>& frames, const OAConfig& cfg, double c0, std::ostream& out) {
  out << "sensor_id,t,d\n";
  for (const auto& f : frames) fmt::print(out, "{},{},{}\n", f.sensor_id, f.t_emit, fmt_opt(nearest_obstacle_distance(f, cfg, c0)));
}

}  // namespace usnav
