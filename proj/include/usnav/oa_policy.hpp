#pragma once

// Reactive obstacle avoidance: nearest echo via a dynamic threshold, then
// forward speed and yaw rate scaled by that distance, with a random turn
// direction that is frozen while an obstacle is close.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>

#include "usnav/common.hpp"
#include "usnav/signal_core.hpp"
#include "usnav/world_sim.hpp"

namespace usnav {

struct OAConfig {
  double v_max = 0.5;          // m/s
  double d_stop = 0.3;         // m, forward speed reaches zero
  double d_free = 1.5;         // m, full speed and no turning
  double yaw_rate_max = 1.5;   // rad/s
  double lock_distance = 0.40; // m
  double redirect_period = 10.0;  // s

  // threshold(k) = noise_margin * noise_floor + threshold_floor * (1 + threshold_decay)^-k
  double threshold_floor = 400.0;
  double threshold_decay = 0.02;
  double noise_margin = 6.0;
  std::size_t exclude_ringdown = 6;
};

inline void validate(const OAConfig& c) {
  if (!(c.d_stop > 0.0) || !(c.d_stop < c.d_free) || !(c.lock_distance > 0.0) || !(c.v_max >= 0.0) ||
      !(c.yaw_rate_max >= 0.0) || !(c.redirect_period > 0.0) || c.threshold_floor < 0.0 || c.threshold_decay < 0.0) {
    throw Error(ErrorCode::invalid_argument, "invalid OA config");
  }
}

inline double oa_threshold(std::size_t k, const OAConfig& cfg, double noise_floor) {
  return cfg.noise_margin * noise_floor +
         cfg.threshold_floor * std::pow(1.0 + cfg.threshold_decay, -static_cast<double>(k));
}

/// Mean sample magnitude over a set of echo-free frames.
inline double calibrate_noise_floor(std::span<const IQFrame> frames) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames) {
    for (const auto& s : f.samples) {
      sum += sample_magnitude(s);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

/// Distance to the first echo above the dynamic threshold. The index is moved
/// from the first crossing to the top of that echo before converting to range.
inline std::optional<double> nearest_obstacle_distance(const IQFrame& frame, const OAConfig& cfg,
                                                       double c0 = kDefaultSpeedOfSound, double noise_floor = 0.0) {
  const std::size_t n = frame.size();
  for (std::size_t k = cfg.exclude_ringdown; k < n; ++k) {
    if (sample_magnitude(frame.samples[k]) > oa_threshold(k, cfg, noise_floor)) {
      std::size_t peak = k;
      while (peak + 1 < n && sample_magnitude(frame.samples[peak + 1]) > sample_magnitude(frame.samples[peak])) {
        ++peak;
      }
      return static_cast<double>(peak) / frame.odr_hz * c0 / 2.0;
    }
  }
  return std::nullopt;
}

class OAPolicy {
 public:
  OAPolicy(OAConfig cfg, Rng rng) : cfg_(cfg), rng_(std::move(rng)) {
    validate(cfg_);
    yaw_sign_ = coin() ? 1 : -1;
    next_redirect_ = cfg_.redirect_period;
  }

  /// Called once per measurement with non-decreasing t.
  OACommand control(std::optional<double> d, double t) {
    const bool locked = d && *d < cfg_.lock_distance;
    while (t >= next_redirect_) {
      if (!locked) yaw_sign_ = coin() ? 1 : -1;
      next_redirect_ += cfg_.redirect_period;
    }
    OACommand cmd;
    if (!d) {
      cmd.v_forward = cfg_.v_max;
      cmd.yaw_rate = 0.0;
      return cmd;
    }
    const double span = cfg_.d_free - cfg_.d_stop;
    cmd.v_forward = cfg_.v_max * std::clamp((*d - cfg_.d_stop) / span, 0.0, 1.0);
    cmd.yaw_rate = yaw_sign_ * cfg_.yaw_rate_max * std::clamp((cfg_.d_free - *d) / span, 0.0, 1.0);
    return cmd;
  }

  int yaw_sign() const noexcept { return yaw_sign_; }
  const OAConfig& config() const noexcept { return cfg_; }

 private:
  bool coin() { return (rng_() >> 63) != 0; }

  OAConfig cfg_;
  Rng rng_;
  int yaw_sign_ = 1;
  double next_redirect_ = 10.0;
};

}  // namespace usnav
