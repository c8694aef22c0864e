#pragma once

// JSON scene files, surface presets and experiment configs.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "usnav/echo_sim.hpp"
#include "usnav/material.hpp"
#include "usnav/oa_policy.hpp"
#include "usnav/velocity_estimator.hpp"
#include "usnav/world_sim.hpp"

namespace usnav {

using Json = nlohmann::json;

inline Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open " + path.string());
  try {
    return Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::config, path.string() + ": " + e.what());
  }
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    try {
      out = it->get<T>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::config, std::string("field '") + key + "': " + e.what());
    }
  }
}

inline Material material_from_json(const std::string& name, const Json& j, Material base = {}) {
  Material m = std::move(base);
  m.name = name;
  read_opt(j, "acoustic_reflectivity", m.acoustic_reflectivity);
  read_opt(j, "optical_tof_visible", m.optical_tof_visible);
  read_opt(j, "feature_density", m.feature_density);
  read_opt(j, "softness", m.softness);
  validate(m);
  return m;
}

using MaterialPalette = std::map<std::string, Material>;

inline MaterialPalette builtin_materials() {
  MaterialPalette p;
  for (auto m : {materials::wall(), materials::glass(), materials::black_panel(), materials::soft_chair(),
                 materials::table_top(), materials::carpet()}) {
    p.emplace(m.name, m);
  }
  return p;
}

struct StartPose {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> yaw;  // random when unset
  double position_jitter = 0.0;
};

struct Scene {
  std::string name;
  World world;
  StartPose start;
  double height = 0.5;
};

/// Scene schema:
///   { "name": ..., "materials": {name: {...}}, "height": 0.5,
///     "start": {"x":0, "y":0, "yaw": null, "position_jitter": 0.2},
///     "obstacles": [ {"material": "glass", "segments": [[x1,y1,x2,y2], ...]},
///                    {"material": "wall", "polyline": [[x,y], ...], "closed": true} ] }
inline Scene scene_from_json(const Json& j, MaterialPalette palette = builtin_materials()) {
  Scene scene;
  read_opt(j, "name", scene.name);
  read_opt(j, "height", scene.height);
  if (auto it = j.find("materials"); it != j.end()) {
    for (const auto& [name, body] : it->items()) {
      const auto base = palette.count(name) ? palette.at(name) : Material{};
      palette[name] = material_from_json(name, body, base);
    }
  }
  if (auto it = j.find("start"); it != j.end()) {
    read_opt(*it, "x", scene.start.x);
    read_opt(*it, "y", scene.start.y);
    if (auto y = it->find("yaw"); y != it->end() && !y->is_null()) scene.start.yaw = y->get<double>();
    read_opt(*it, "position_jitter", scene.start.position_jitter);
  }
  if (auto it = j.find("obstacles"); it != j.end()) {
    for (const auto& o : *it) {
      const std::string mat = o.value("material", std::string("wall"));
      if (!palette.count(mat)) throw Error(ErrorCode::config, "unknown material '" + mat + "'");
      Obstacle obstacle;
      obstacle.material = palette.at(mat);
      if (auto s = o.find("segments"); s != o.end()) {
        for (const auto& seg : *s) {
          if (seg.size() != 4) throw Error(ErrorCode::config, "segment needs [x1, y1, x2, y2]");
          obstacle.segments.push_back({{seg[0].get<double>(), seg[1].get<double>()},
                                       {seg[2].get<double>(), seg[3].get<double>()}});
        }
      }
      if (auto pl = o.find("polyline"); pl != o.end()) {
        std::vector<Vec2> pts;
        for (const auto& p : *pl) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        for (std::size_t k = 1; k < pts.size(); ++k) obstacle.segments.push_back({pts[k - 1], pts[k]});
        if (o.value("closed", false) && pts.size() > 2) obstacle.segments.push_back({pts.back(), pts.front()});
      }
      scene.world.obstacles.push_back(std::move(obstacle));
    }
  }
  try {
    validate(scene.world);
  } catch (const Error& e) {
    throw Error(ErrorCode::config, std::string("scene '") + scene.name + "': " + e.what());
  }
  return scene;
}

inline Scene load_scene(const std::filesystem::path& path) {
  auto j = load_json(path);
  MaterialPalette palette = builtin_materials();
  if (auto it = j.find("palette"); it != j.end() && it->is_string()) {
    const auto pj = load_json(path.parent_path() / it->get<std::string>());
    for (const auto& [name, body] : pj.items()) {
      if (name.starts_with('_')) continue;
      const auto base = palette.count(name) ? palette.at(name) : Material{};
      palette[name] = material_from_json(name, body, base);
    }
  }
  auto scene = scene_from_json(j, palette);
  if (scene.name.empty()) scene.name = path.stem().string();
  return scene;
}

/// Surface / disturbance preset for the velocity benchmark.
struct SurfacePreset {
  std::string name;
  double feature_density = 0.5;
  NoiseSpec noise;
  VelocityMethod method = VelocityMethod::approx;
};

using PresetTable = std::map<std::string, SurfacePreset>;

inline PresetTable presets_from_json(const Json& j) {
  PresetTable table;
  for (const auto& [name, body] : j.items()) {
    if (name.starts_with('_')) continue;
    SurfacePreset p;
    p.name = name;
    read_opt(body, "feature_density", p.feature_density);
    read_opt(body, "iq_noise_sigma", p.noise.iq_noise_sigma);
    read_opt(body, "roughness_phase_sigma", p.noise.roughness_phase_sigma);
    read_opt(body, "airflow_drift_sigma", p.noise.airflow_drift_sigma);
    read_opt(body, "airflow_correlation_s", p.noise.airflow_correlation_s);
    std::string method = "approx";
    read_opt(body, "estimator_method", method);
    p.method = parse_velocity_method(method);
    validate(p.noise);
    if (p.feature_density < 0.0 || p.feature_density > 1.0) {
      throw Error(ErrorCode::config, "preset '" + name + "': feature_density outside [0, 1]");
    }
    table.emplace(name, p);
  }
  return table;
}

enum class OASensor { ultrasonic, laser };

constexpr std::string_view to_string(OASensor s) { return s == OASensor::ultrasonic ? "ultrasonic" : "laser"; }

inline OASensor parse_oa_sensor(std::string_view s) {
  if (s == "ultrasonic") return OASensor::ultrasonic;
  if (s == "laser") return OASensor::laser;
  throw Error(ErrorCode::config, "unknown sensor '" + std::string(s) + "' (ultrasonic | laser)");
}

enum class ProfileKind { sinusoid, random_walk };

struct VelocityProfileConfig {
  ProfileKind kind = ProfileKind::sinusoid;
  double amplitude = 1.0;     // m/s
  double frequency_hz = 0.2;  // sinusoid
  double accel_sigma = 1.0;   // random walk, m/s^2
  double v_limit = 2.0;       // random walk bound, m/s
};

struct ExperimentConfig {
  std::filesystem::path scenario;
  OASensor sensor = OASensor::ultrasonic;
  int n_runs = 10;
  std::uint64_t seed = 1;
  double max_duration_s = 120.0;
  std::string preset = "table";
  std::filesystem::path presets_file;
  std::filesystem::path out_dir = "out";
  OAConfig oa;
  double noise_iq_sigma = 2.0;  // ultrasonic OA sensor noise, counts

  // velocity benchmark
  double bench_duration_s = 30.0;
  double bench_height = 0.56;
  VelocityProfileConfig profile;
};

inline void validate(const ExperimentConfig& c) {
  if (c.n_runs < 1) throw Error(ErrorCode::config, "n_runs must be >= 1");
  if (!(c.max_duration_s > 0.0) || !(c.bench_duration_s > 0.0) || !(c.bench_height > 0.0)) {
    throw Error(ErrorCode::config, "durations and height must be positive");
  }
}

/// Paths inside the config are resolved relative to the config file.
inline ExperimentConfig experiment_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  if (auto it = j.find("scenario"); it != j.end()) c.scenario = base_dir / it->get<std::string>();
  if (auto it = j.find("presets"); it != j.end()) c.presets_file = base_dir / it->get<std::string>();
  if (auto it = j.find("out"); it != j.end()) c.out_dir = it->get<std::string>();
  if (auto it = j.find("sensor"); it != j.end()) c.sensor = parse_oa_sensor(it->get<std::string>());
  read_opt(j, "n_runs", c.n_runs);
  read_opt(j, "seed", c.seed);
  read_opt(j, "max_duration_s", c.max_duration_s);
  read_opt(j, "preset", c.preset);
  read_opt(j, "ultrasonic_iq_noise_sigma", c.noise_iq_sigma);
  if (auto it = j.find("oa"); it != j.end()) {
    read_opt(*it, "v_max", c.oa.v_max);
    read_opt(*it, "d_stop", c.oa.d_stop);
    read_opt(*it, "d_free", c.oa.d_free);
    read_opt(*it, "yaw_rate_max", c.oa.yaw_rate_max);
    read_opt(*it, "lock_distance", c.oa.lock_distance);
    read_opt(*it, "redirect_period", c.oa.redirect_period);
    read_opt(*it, "threshold_floor", c.oa.threshold_floor);
    read_opt(*it, "threshold_decay", c.oa.threshold_decay);
    read_opt(*it, "noise_margin", c.oa.noise_margin);
    read_opt(*it, "exclude_ringdown", c.oa.exclude_ringdown);
    validate(c.oa);
  }
  if (auto it = j.find("velocity"); it != j.end()) {
    read_opt(*it, "duration_s", c.bench_duration_s);
    read_opt(*it, "height", c.bench_height);
    std::string kind = "sinusoid";
    read_opt(*it, "profile", kind);
    if (kind == "sinusoid") c.profile.kind = ProfileKind::sinusoid;
    else if (kind == "random_walk") c.profile.kind = ProfileKind::random_walk;
    else throw Error(ErrorCode::config, "unknown profile '" + kind + "'");
    read_opt(*it, "amplitude", c.profile.amplitude);
    read_opt(*it, "frequency_hz", c.profile.frequency_hz);
    read_opt(*it, "accel_sigma", c.profile.accel_sigma);
    read_opt(*it, "v_limit", c.profile.v_limit);
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return experiment_config_from_json(load_json(path), path.parent_path());
}

}  // namespace usnav
