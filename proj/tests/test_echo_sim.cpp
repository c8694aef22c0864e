#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "usnav/echo_sim.hpp"
#include "usnav/oracle_check.hpp"
#include "usnav/velocity_estimator.hpp"

using namespace usnav;

TEST(ExactPathLengths, StaticSymmetricCase) {
  for (double h : {0.1, 0.56, 1.0, 1.5}) {
    TwoWayGeometry g;
    g.height_a = g.height_b = h;
    const auto s = exact_path_lengths(g);
    const double expected = 2.0 * std::sqrt(h * h + 0.25 * g.separation * g.separation);
    EXPECT_NEAR(s.length_ab, expected, 1e-12);
    EXPECT_NEAR(s.length_ba, expected, 1e-12);
    EXPECT_NEAR(s.time_ab, expected / g.c0, 1e-15);
  }
}

TEST(ExactPathLengths, MovingCaseMatchesClosedFormAndLinearDelta) {
  TwoWayGeometry g;
  g.velocity = 0.5;
  const auto s = exact_path_lengths(g);
  const auto o = oracle::two_way(g.separation, g.height_a, g.height_b, g.velocity, g.c0);
  EXPECT_NEAR(s.length_ab, o.length_ab, 1e-12);
  EXPECT_NEAR(s.length_ba, o.length_ba, 1e-12);
  const double delta = s.length_ba - s.length_ab;
  EXPECT_NE(s.length_ab, s.length_ba);
  EXPECT_NEAR(delta, 1.108e-4, 0.05 * 1.108e-4);
  EXPECT_NEAR(delta, oracle::exact_delta(g.separation, g.velocity, g.c0), 1e-12);
}

TEST(ExactPathLengths, UnequalHeightsCancelAtRest) {
  TwoWayGeometry g;
  g.height_a = 0.5;
  g.height_b = 0.6;
  const auto s = exact_path_lengths(g);
  EXPECT_NEAR(s.length_ab, s.length_ba, 1e-14);
}

TEST(ExactPathLengths, OracleConsistencyProperty) {
  Rng rng = make_stream(21, "test");
  for (int k = 0; k < 1000; ++k) {
    TwoWayGeometry g;
    g.velocity = uniform(rng, -2.0, 2.0);
    if (std::abs(g.velocity) < 1e-4) continue;
    g.height_a = g.height_b = uniform(rng, 0.2, 1.5);
    g.separation = uniform(rng, 0.02, 0.08);
    const auto s = exact_path_lengths(g);
    const auto o = oracle::two_way(g.separation, g.height_a, g.height_b, g.velocity, g.c0);
    ASSERT_NEAR(s.time_ab, o.time_ab, 1e-13);
    ASSERT_NEAR(s.time_ba, o.time_ba, 1e-13);
    const double predicted = 2.0 * g.separation * g.velocity / g.c0;
    ASSERT_LE(std::abs((s.length_ba - s.length_ab) - predicted), 0.05 * std::abs(predicted));
  }
}

TEST(ExactPathLengths, GammaApproachesRightAngle) {
  double previous = 1e9;
  for (double v = 2.0; v > 1e-3; v *= 0.5) {
    TwoWayGeometry g;
    g.velocity = v;
    const auto s = exact_path_lengths(g);
    const double dev = std::abs(90.0 - s.gamma_ab_deg);
    EXPECT_LT(dev, previous) << v;
    previous = dev;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(ExactPathLengths, RejectsInvalidGeometry) {
  TwoWayGeometry g;
  g.height_a = -1.0;
  EXPECT_THROW(exact_path_lengths(g), Error);
}

TEST(SynthesizeFrame, PeakTimeAndPhaseRecovered) {
  FrameConfig cfg;
  Rng rng = make_stream(3, "test");
  for (int k = 0; k < 200; ++k) {
    const double rtt = uniform(rng, 0.5e-3, 3.5e-3);
    const double phi = uniform(rng, -10.0, 10.0);
    const EchoSpec echo{rtt, 500.0, phi};
    const auto frame = synthesize_frame(std::span(&echo, 1), cfg, NoiseSpec{});
    const auto p = detect_ground_peak(frame, 20);
    EXPECT_LE(std::abs(p.t_peak - rtt), 1.0 / cfg.odr_hz());
    EXPECT_NEAR(wrap_phase(p.phase - wrap_phase(phi)), 0.0, 1e-6);
  }
}

TEST(SynthesizeFrame, NoEchoesIsNoEcho) {
  const auto frame = synthesize_frame({}, FrameConfig{}, NoiseSpec{});
  try {
    detect_ground_peak(frame, 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_echo);
  }
}

TEST(SynthesizeFrame, EchoBeyondSpanIsOutOfRange) {
  FrameConfig cfg;
  const EchoSpec echo{cfg.span_s() * 1.01, 1.0, 0.0};
  try {
    synthesize_frame(std::span(&echo, 1), cfg, NoiseSpec{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::out_of_range);
    EXPECT_STREQ(e.what(), "out of range");
  }
}

TEST(SynthesizeFrame, SameSeedSameFramesDifferentSeedDifferentFrames) {
  const NoiseSpec a{3.0, 0.2, 0.1, 0.05, 42};
  NoiseSpec b = a;
  b.seed = 43;
  const EchoSpec echo{2e-3, 800.0, 1.0};
  const auto fa1 = synthesize_frame(std::span(&echo, 1), FrameConfig{}, a);
  const auto fa2 = synthesize_frame(std::span(&echo, 1), FrameConfig{}, a);
  const auto fb = synthesize_frame(std::span(&echo, 1), FrameConfig{}, b);
  EXPECT_EQ(fa1, fa2);
  EXPECT_NE(fa1, fb);
}

TEST(SynthesizeFrame, IqNoiseHasConfiguredSigma) {
  const NoiseSpec n{4.0, 0.0, 0.0, 0.05, 8};
  Rng rng = make_stream(n.seed, "test");
  double sum2 = 0.0;
  std::size_t count = 0;
  for (int k = 0; k < 50; ++k) {
    const auto f = synthesize_frame({}, FrameConfig{}, n, rng);
    for (const auto& s : f.samples) {
      sum2 += s.i * s.i + s.q * s.q;
      count += 2;
    }
  }
  EXPECT_NEAR(std::sqrt(sum2 / static_cast<double>(count)), 4.0, 0.1);
}

TEST(AirflowDrift, StationaryVarianceAndCorrelation) {
  AirflowDrift drift(0.1, 0.05);
  Rng rng = make_stream(1, "test");
  std::vector<double> xs;
  for (int k = 0; k < 200000; ++k) xs.push_back(drift.sample(k * 1e-3, rng));
  double m2 = 0.0;
  for (double x : xs) m2 += x * x;
  EXPECT_NEAR(std::sqrt(m2 / xs.size()), 0.1, 0.01);
  // lag-50 autocorrelation of an OU process with tau = 50 ms is exp(-1)
  std::vector<double> a(xs.begin(), xs.end() - 50), b(xs.begin() + 50, xs.end());
  EXPECT_NEAR(oracle::pearson(a, b), std::exp(-1.0), 0.05);
}

TEST(TwoWayPair, ZeroVelocityGivesZeroPhaseDifference) {
  for (double h : {0.3, 0.56, 0.9}) {
    TwoWayGeometry g;
    g.height_a = g.height_b = h;
    PairConfig pc;
    pc.odr_divisor = divisor_for_height(h, h, g.separation, pc.f_op_hz, g.c0);
    const auto fr = simulate_two_way_pair(g, pc, NoiseSpec{});
    const auto pb = detect_ground_peak(fr.a_to_b, 20);
    const auto pa = detect_ground_peak(fr.b_to_a, 20);
    EXPECT_NEAR(phase_difference(pa, pb), 0.0, 1e-6);
  }
}

TEST(TwoWayPair, HeightOffsetCancelsAtRest) {
  Rng rng = make_stream(4, "test");
  for (int k = 0; k < 100; ++k) {
    TwoWayGeometry g;
    g.height_a = uniform(rng, 0.2, 1.0);
    g.height_b = uniform(rng, 0.2, 1.0);
    PairConfig pc;
    pc.odr_divisor = divisor_for_height(g.height_a, g.height_b, g.separation, pc.f_op_hz, g.c0);
    const auto fr = simulate_two_way_pair(g, pc, NoiseSpec{});
    EXPECT_NEAR(phase_difference(detect_ground_peak(fr.b_to_a, 20), detect_ground_peak(fr.a_to_b, 20)), 0.0, 1e-6);
  }
}

TEST(TwoWayPair, FramesCarryTimingAndIdentity) {
  TwoWayGeometry g;
  g.velocity = 1.0;
  PairConfig pc;
  pc.t_emit = 2.5;
  const auto fr = simulate_two_way_pair(g, pc, NoiseSpec{});
  EXPECT_EQ(fr.a_to_b.sensor_id, "B");
  EXPECT_EQ(fr.b_to_a.sensor_id, "A");
  EXPECT_DOUBLE_EQ(fr.a_to_b.t_emit, 2.5);
  EXPECT_DOUBLE_EQ(fr.b_to_a.t_emit, 2.5 + fr.paths.time_ab);
  EXPECT_NO_THROW(validate(fr.a_to_b));
}

TEST(TwoWayPair, DeterministicUnderNoise) {
  TwoWayGeometry g;
  g.velocity = -0.8;
  const NoiseSpec n{6.0, 0.3, 0.2, 0.05, 77};
  EXPECT_EQ(simulate_two_way_pair(g, PairConfig{}, n).b_to_a, simulate_two_way_pair(g, PairConfig{}, n).b_to_a);
}

TEST(OracleCheckSuite, AllPropertiesPass) {
  for (const auto& r : run_oracle_checks(3, 300)) EXPECT_TRUE(r.passed) << r.name << " " << r.detail;
}
