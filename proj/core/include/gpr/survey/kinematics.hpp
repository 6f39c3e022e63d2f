#pragma once

namespace gpr::survey {

/// Body-frame velocity of the three-wheel omnidirectional base.
struct BodyTwist {
  double vx = 0.0;     // m/s
  double vy = 0.0;     // m/s
  double omega = 0.0;  // rad/s
};

/// Linear drive speed of each wheel plus the wheel-to-center distance.
struct WheelVelocities {
  double w1 = 0.0;  // m/s
  double w2 = 0.0;
  double w3 = 0.0;
  double d = 0.0;  // m
};

/// Wheels mounted at 0, +2pi/3 and -2pi/3:
///   w_i = cos(a_i) vx + sin(a_i) vy - d omega
/// Throws InvalidArgument for d <= 0 or non-finite input.
WheelVelocities wheel_velocities(const BodyTwist& twist, double d);

/// Closed-form inverse of wheel_velocities.
BodyTwist body_twist_from_wheels(const WheelVelocities& wheels);

}  // namespace gpr::survey
