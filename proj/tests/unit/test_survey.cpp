#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "gpr/common/error.hpp"
#include "gpr/survey/kinematics.hpp"
#include "gpr/survey/plan.hpp"

using namespace gpr;
using namespace gpr::survey;

namespace {

// Eq. 1 written out as a matrix product, independent of the library's
// arrangement of terms.
WheelVelocities matrix_oracle(const BodyTwist& t, double d) {
  const double angles[3] = {0.0, 2.0 * std::numbers::pi / 3.0, -2.0 * std::numbers::pi / 3.0};
  double w[3];
  for (int i = 0; i < 3; ++i) w[i] = std::cos(angles[i]) * t.vx + std::sin(angles[i]) * t.vy - d * t.omega;
  return {w[0], w[1], w[2], d};
}

void check_wheels(const WheelVelocities& got, double w1, double w2, double w3) {
  CHECK(std::abs(got.w1 - w1) < 1e-12);
  CHECK(std::abs(got.w2 - w2) < 1e-12);
  CHECK(std::abs(got.w3 - w3) < 1e-12);
}

}  // namespace

TEST_CASE("wheel velocities on the unit twists") {
  check_wheels(wheel_velocities({0, 0, 0}, 0.2), 0, 0, 0);
  check_wheels(wheel_velocities({1, 0, 0}, 0.2), 1, -0.5, -0.5);
  check_wheels(wheel_velocities({0, 0, 1}, 0.2), -0.2, -0.2, -0.2);
  check_wheels(wheel_velocities({0, 1, 0}, 0.2), 0, std::sqrt(3.0) / 2, -std::sqrt(3.0) / 2);
}

TEST_CASE("wheel velocities agree with the rotation-matrix oracle") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 200; ++i) {
    const BodyTwist t{u(rng), u(rng), u(rng)};
    const auto o = matrix_oracle(t, 0.35);
    check_wheels(wheel_velocities(t, 0.35), o.w1, o.w2, o.w3);
  }
}

TEST_CASE("inverse kinematics") {
  const auto t0 = body_twist_from_wheels({0, 0, 0, 0.2});
  CHECK(t0.vx == 0.0);
  CHECK(t0.vy == 0.0);
  CHECK(t0.omega == 0.0);
  const auto t1 = body_twist_from_wheels({1, -0.5, -0.5, 0.2});
  CHECK(std::abs(t1.vx - 1) < 1e-12);
  CHECK(std::abs(t1.vy) < 1e-12);
  CHECK(std::abs(t1.omega) < 1e-12);

  Rng rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const BodyTwist t{u(rng), u(rng), u(rng)};
    const auto back = body_twist_from_wheels(wheel_velocities(t, 0.2));
    CHECK(std::abs(back.vx - t.vx) < 1e-12);
    CHECK(std::abs(back.vy - t.vy) < 1e-12);
    CHECK(std::abs(back.omega - t.omega) < 1e-12);
  }
}

TEST_CASE("kinematics rejects non-positive wheel distance") {
  CHECK_THROWS_AS(wheel_velocities({1, 0, 0}, 0.0), InvalidArgument);
  CHECK_THROWS_AS(wheel_velocities({1, 0, 0}, -0.1), InvalidArgument);
  CHECK_THROWS_AS(body_twist_from_wheels({1, 0, 0, 0.0}), InvalidArgument);
}

TEST_CASE("kinematics is linear and pure translations have zero wheel sum") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 100; ++i) {
    const BodyTwist a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    const double s = u(rng), r = u(rng);
    const auto lhs = wheel_velocities({s * a.vx + r * b.vx, s * a.vy + r * b.vy, s * a.omega + r * b.omega}, 0.2);
    const auto wa = wheel_velocities(a, 0.2), wb = wheel_velocities(b, 0.2);
    check_wheels(lhs, s * wa.w1 + r * wb.w1, s * wa.w2 + r * wb.w2, s * wa.w3 + r * wb.w3);

    const auto w = wheel_velocities({a.vx, a.vy, 0.0}, 0.2);
    CHECK(w.w1 + w.w2 + w.w3 == 0.0);
  }
}

TEST_CASE("grid survey line counts") {
  const auto p = plan_grid_survey({2, 2, 0.6}, 0.2, 0.02, ScanAxis::X);
  CHECK(p.lines.size() == 11);
  CHECK_FALSE(p.warning);

  const auto q = plan_grid_survey({1, 1, 0.5}, 0.5, 0.01, ScanAxis::X);
  REQUIRE(q.lines.size() == 3);
  CHECK(q.lines[0].start.y == 0.0);
  CHECK(q.lines[1].start.y == 0.5);
  CHECK(q.lines[2].start.y == 1.0);
  for (const auto& l : q.lines) CHECK(l.axis() == ScanAxis::X);

  const auto y = plan_grid_survey({2, 1, 0.5}, 0.25, 0.05, ScanAxis::Y);
  CHECK(y.lines.size() == 9);
  CHECK(y.lines[0].axis() == ScanAxis::Y);
  CHECK(y.lines[0].length() == doctest::Approx(1.0));
}

TEST_CASE("spacing wider than the slab gives one centered line and a warning") {
  const auto p = plan_grid_survey({2, 1, 0.5}, 3.0, 0.02, ScanAxis::X);
  REQUIRE(p.lines.size() == 1);
  CHECK(p.lines[0].start.y == doctest::Approx(0.5));
  CHECK(p.warning.has_value());
  CHECK_THROWS_AS(plan_grid_survey({2, 2, 0.5}, 0.0, 0.02, ScanAxis::X), InvalidArgument);
  CHECK_THROWS_AS(plan_grid_survey({2, 2, 0.5}, 0.2, -1.0, ScanAxis::X), InvalidArgument);
}

TEST_CASE("poses are monotone, on the surface, rotation-free") {
  const auto plan = plan_grid_survey({2, 2, 0.6}, 0.2, 0.02, ScanAxis::X);
  for (const auto& line : plan.lines) {
    const auto poses = line.poses();
    CHECK(poses.size() == line.trace_count());
    CHECK(poses.size() == 101);
    for (std::size_t i = 0; i < poses.size(); ++i) {
      CHECK(poses[i].position.z == 0.0);
      CHECK(poses[i].heading == 0.0);
      if (i) {
        CHECK(poses[i].position.x > poses[i - 1].position.x);
        CHECK(poses[i].timestamp > poses[i - 1].timestamp);
      }
    }
  }
}

TEST_CASE("jitter keeps z and is a no-op at sigma 0") {
  const auto poses = plan_grid_survey({1, 1, 0.5}, 0.5, 0.1, ScanAxis::X).lines[0].poses();
  Rng rng(1);
  const auto same = jitter_positions(poses, 0.0, rng);
  for (std::size_t i = 0; i < poses.size(); ++i) CHECK(same[i].position == poses[i].position);
  const auto moved = jitter_positions(poses, 0.01, rng);
  bool any = false;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(moved[i].position.z == poses[i].position.z);
    any = any || !(moved[i].position == poses[i].position);
  }
  CHECK(any);
  CHECK_THROWS_AS(jitter_positions(poses, -1.0, rng), InvalidArgument);
}

TEST_CASE("survey text round trip and parse errors") {
  const auto plan = plan_grid_survey({2, 2, 0.6}, 0.2, 0.02, ScanAxis::X);
  const auto back = parse_survey(format_survey(plan));
  REQUIRE(back.lines.size() == plan.lines.size());
  for (std::size_t i = 0; i < plan.lines.size(); ++i) {
    CHECK(back.lines[i].start == plan.lines[i].start);
    CHECK(back.lines[i].end == plan.lines[i].end);
    CHECK(back.lines[i].trace_spacing == plan.lines[i].trace_spacing);
  }
  auto error_line = [](const std::string& text) {
    try {
      (void)parse_survey(text);
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(error_line("line 0 0 1 0 0.1\nline 0 0 1 1 0.1\n").find("line 2") != std::string::npos);
  CHECK(error_line("line 0 0 1 0\n").find("line 1") != std::string::npos);
  CHECK(error_line("# comment\nrow 0 0 1 0 0.1\n").find("line 2") != std::string::npos);
  CHECK(error_line("line 0 0 1 0 0\n").find("line 1") != std::string::npos);
  CHECK(error_line("") != "no error");

  const auto path = std::filesystem::temp_directory_path() / "gpr_survey_roundtrip.txt";
  save_survey(plan, path);
  CHECK(load_survey(path).lines.size() == 11);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_survey(path), DataError);
}
