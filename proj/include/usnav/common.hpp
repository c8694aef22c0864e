#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace usnav {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Speed of sound in air at 20 degC.
inline constexpr double kDefaultSpeedOfSound = 343.0;

enum class ErrorCode {
  empty_frame,
  non_finite,
  no_echo,
  out_of_range,
  invalid_argument,
  non_convergence,
  non_physical,
  config,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

using Rng = std::mt19937_64;

// FNV-1a, used to turn stream names into seed words.
constexpr std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent generator for a named sub-stream of a run seed.
inline Rng make_stream(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  const std::uint64_t tag = hash_name(stream);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

// Box-Muller on top of the raw engine. std::normal_distribution is
// implementation-defined, this keeps output identical across standard libraries.
inline double standard_normal(Rng& rng) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = static_cast<double>(rng() >> 11) * scale;
  const double u2 = static_cast<double>(rng() >> 11) * scale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

inline double uniform(Rng& rng, double lo, double hi) {
  constexpr double scale = 1.0 / 9007199254740992.0;
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * scale;
}

}  // namespace usnav
