// usnav: command-line front end for the obstacle-avoidance runs, the velocity
// benchmark, the oracle self-check and IQ log replay.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "usnav/config.hpp"
#include "usnav/experiment.hpp"
#include "usnav/iq_log.hpp"
#include "usnav/oracle_check.hpp"

namespace fs = std::filesystem;
using namespace usnav;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<std::string> out;
  std::optional<std::string> preset;
};

ExperimentConfig resolve(const CommonFlags& f) {
  if (f.config.empty()) throw Error(ErrorCode::config, "--config is required");
  ExperimentConfig cfg = load_experiment_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.runs) cfg.n_runs = *f.runs;
  if (f.out) cfg.out_dir = *f.out;
  if (f.preset) cfg.preset = *f.preset;
  validate(cfg);
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

int cmd_oa_run(const CommonFlags& f, const std::optional<std::string>& sensor) {
  ExperimentConfig cfg = resolve(f);
  if (sensor) cfg.sensor = parse_oa_sensor(*sensor);
  const Scene scene = load_scene(cfg.scenario);
  const OAReport report = run_oa_experiment(cfg, scene);

  auto runs = open_out(cfg.out_dir / "runs.csv");
  write_runs_csv(runs, report);
  for (const auto& run : report.runs) {
    auto trace = open_out(cfg.out_dir / "traces" / fmt::format("run_{:03d}.csv", run.run_id));
    write_trace_csv(trace, run);
  }
  auto summary = open_out(cfg.out_dir / "summary.txt");
  write_oa_summary(summary, report);
  write_oa_summary(std::cout, report);
  return 0;
}

int cmd_vel_bench(const CommonFlags& f, const std::optional<std::string>& iq_log) {
  const ExperimentConfig cfg = resolve(f);
  std::ofstream log_file;
  if (iq_log) log_file = open_out(*iq_log);
  const VelocityReport report = run_velocity_benchmark(cfg, iq_log ? &log_file : nullptr);
  auto tracks = open_out(cfg.out_dir / "tracks.csv");
  write_tracks_csv(tracks, report);
  auto mse = open_out(cfg.out_dir / "mse.csv");
  write_mse_csv(mse, report);
  auto summary = open_out(cfg.out_dir / "summary.txt");
  write_velocity_summary(summary, report);
  write_velocity_summary(std::cout, report);
  return 0;
}

int cmd_oracle_check(std::uint64_t seed, int cases) {
  bool ok = true;
  for (const auto& r : run_oracle_checks(seed, cases)) {
    fmt::print("[{}] {}{}{}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail.empty() ? "" : " : ", r.detail);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

int cmd_replay(const std::string& log, const std::string& mode, const std::optional<std::string>& out_path,
               const std::string& method) {
  const auto frames = read_frames(log);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (out_path) {
    file = open_out(*out_path);
    out = &file;
  }
  bool velocity = mode == "vel";
  if (mode == "auto") {
    velocity = !frames.empty() && std::all_of(frames.begin(), frames.end(), [](const IQFrame& fr) {
      return fr.sensor_id == "A" || fr.sensor_id == "B";
    });
  } else if (mode != "vel" && mode != "oa") {
    throw Error(ErrorCode::config, "--mode must be auto, vel or oa");
  }
  if (velocity) {
    EstimatorConfig cfg;
    cfg.method = parse_velocity_method(method);
    const auto pairs = replay_velocity(frames, cfg, *out);
    std::cerr << fmt::format("replayed {} frames, {} velocity pairs\n", frames.size(), pairs);
  } else {
    replay_oa(frames, OAConfig{}, kDefaultSpeedOfSound, *out);
    std::cerr << fmt::format("replayed {} frames\n", frames.size());
  }
  return 0;
}

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "Experiment config (JSON)");
  sub->add_option("--seed", f.seed, "Base seed");
  sub->add_option("--runs", f.runs, "Number of runs");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--preset", f.preset, "Surface preset name");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultrasonic ego-velocity and obstacle-avoidance simulator"};
  app.require_subcommand(1);

  CommonFlags oa_flags;
  std::optional<std::string> sensor;
  auto* oa = app.add_subcommand("oa-run", "Seeded obstacle-avoidance exploration runs");
  add_common(oa, oa_flags);
  oa->add_option("--sensor", sensor, "Override the config's sensor (ultrasonic | laser)");

  CommonFlags vel_flags;
  auto* vel = app.add_subcommand("vel-bench", "Velocity benchmark: ultrasonic vs optical flow vs fused");
  add_common(vel, vel_flags);
  std::optional<std::string> iq_log;
  vel->add_option("--iq-log", iq_log, "Also record every simulated pulse pair as an IQ log (JSON lines)");

  std::uint64_t oracle_seed = 1;
  int oracle_cases = 1000;
  auto* oracle = app.add_subcommand("oracle-check", "Run the geometry-oracle property suite");
  oracle->add_option("--seed", oracle_seed, "Seed for the random cases");
  oracle->add_option("--cases", oracle_cases, "Random cases per property");

  std::string log;
  std::string mode = "auto";
  std::string method = "exact";
  std::optional<std::string> replay_out;
  auto* replay = app.add_subcommand("replay", "Process an IQ frame log through the pipelines");
  replay->add_option("log", log, "IQ frame log (JSON lines)")->required();
  replay->add_option("--mode", mode, "auto | vel | oa");
  replay->add_option("--method", method, "Velocity method: exact | approx");
  replay->add_option("--out", replay_out, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*oa) return cmd_oa_run(oa_flags, sensor);
    if (*vel) return cmd_vel_bench(vel_flags, iq_log);
    if (*oracle) return cmd_oracle_check(oracle_seed, oracle_cases);
    if (*replay) return cmd_replay(log, mode, replay_out, method);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
