#include "gpr/survey/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gpr/common/error.hpp"

namespace gpr::survey {

namespace {

void check_distance(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw InvalidArgument("wheel-to-center distance must be > 0, got " + std::to_string(d));
  }
}

// Exact for the 2pi/3 mounting angles: cos = -1/2, sin = +-sqrt(3)/2.
constexpr double kHalf = 0.5;
constexpr double kSinThird = std::numbers::sqrt3 / 2.0;

}  // namespace

WheelVelocities wheel_velocities(const BodyTwist& twist, double d) {
  check_distance(d);
  if (!std::isfinite(twist.vx) || !std::isfinite(twist.vy) || !std::isfinite(twist.omega)) {
    throw InvalidArgument("body twist must be finite");
  }
  const double spin = d * twist.omega;
  // The translation rows sum to zero; deriving the third from the first two
  // keeps that identity exact in floating point.
  const double t1 = twist.vx;
  const double t2 = -kHalf * twist.vx + kSinThird * twist.vy;
  const double t3 = -(t1 + t2);
  return {t1 - spin, t2 - spin, t3 - spin, d};
}

BodyTwist body_twist_from_wheels(const WheelVelocities& w) {
  check_distance(w.d);
  // Rows sum: cos terms and sin terms cancel, leaving -3 d omega.
  const double sum = w.w1 + w.w2 + w.w3;
  const double omega = -sum / (3.0 * w.d);
  const double vx = (2.0 * w.w1 - w.w2 - w.w3) / 3.0;
  const double vy = (w.w2 - w.w3) / std::numbers::sqrt3;
  return {vx, vy, omega};
}

}  // namespace gpr::survey
