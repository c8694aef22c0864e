#pragma once

// 1-D constant-velocity Kalman filter: IMU acceleration drives the prediction,
// velocity measurements (optical flow or ultrasonic) correct it. State is
// (velocity, accelerometer bias).

#include <cmath>

#include <Eigen/Dense>

#include "usnav/common.hpp"

namespace usnav {

struct FusionState {
  double v = 0.0;
  double accel_bias = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();
};

struct ProcessNoise {
  double accel_sigma = 0.05;     // m/s^2, white accelerometer noise
  double bias_walk_sigma = 0.01; // m/s^2 per sqrt(s)
};

inline FusionState predict(const FusionState& s, double accel_meas, double dt, const ProcessNoise& q) {
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  FusionState out = s;
  out.v = s.v + (accel_meas - s.accel_bias) * dt;
  Eigen::Matrix2d F;
  F << 1.0, -dt, 0.0, 1.0;
  Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
  Q(0, 0) = q.accel_sigma * q.accel_sigma * dt * dt;
  Q(1, 1) = q.bias_walk_sigma * q.bias_walk_sigma * dt;
  out.covariance = F * s.covariance * F.transpose() + Q;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

/// Scalar velocity update in Joseph form. Invalid measurements leave the state untouched.
inline FusionState update(const FusionState& s, double v_meas, double r, bool valid = true) {
  if (!valid) return s;
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "measurement variance must be positive");
  if (std::isinf(r)) return s;
  const Eigen::RowVector2d H(1.0, 0.0);
  const double innovation_var = s.covariance(0, 0) + r;
  const Eigen::Vector2d K = s.covariance.col(0) / innovation_var;
  FusionState out = s;
  const double innovation = v_meas - s.v;
  out.v = s.v + K(0) * innovation;
  out.accel_bias = s.accel_bias + K(1) * innovation;
  const Eigen::Matrix2d I_KH = Eigen::Matrix2d::Identity() - K * H;
  out.covariance = I_KH * s.covariance * I_KH.transpose() + (K * K.transpose()) * r;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

inline bool is_psd(const Eigen::Matrix2d& P, double tol = 1e-12) {
  if (std::abs(P(0, 1) - P(1, 0)) > tol * (1.0 + std::abs(P(0, 1)))) return false;
  const double scale = 1.0 + P.cwiseAbs().maxCoeff();
  return P(0, 0) >= -tol * scale && P(1, 1) >= -tol * scale &&
         P.determinant() >= -tol * scale * scale;
}

}  // namespace usnav
