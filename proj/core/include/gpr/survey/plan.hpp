#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpr/common/geometry.hpp"
#include "gpr/common/random.hpp"

namespace gpr::survey {

/// Axis a scan line runs along. Lines are rotation-free, so every survey
/// is a set of axis-aligned straight lines.
enum class ScanAxis { X = 0, Y = 1 };

Vec3 axis_direction(ScanAxis axis);

/// Slab footprint x in [0, x], y in [0, y]; the surface is z = 0 and the
/// slab occupies z in [-z, 0].
struct SlabExtents {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Antenna pose for one trace. The heading is identity for every pose.
struct SurveyPose {
  Vec3 position;
  double timestamp = 0.0;  // s
  static constexpr double heading = 0.0;
};

struct ScanLine {
  Vec3 start;
  Vec3 end;
  double trace_spacing = 0.0;  // m

  ScanAxis axis() const;
  double length() const;
  std::size_t trace_count() const;
  /// One pose per trace, monotone from start towards end.
  std::vector<SurveyPose> poses(double speed_m_per_s = 0.2) const;
};

struct SurveyPlan {
  std::vector<ScanLine> lines;
  double line_spacing = 0.0;
  ScanAxis direction = ScanAxis::X;
  /// Set when the request had to be adjusted (e.g. spacing wider than the slab).
  std::optional<std::string> warning;
};

/// Parallel lines along `direction` covering the slab at `line_spacing`,
/// starting on the slab edge. A spacing wider than the cross extent yields
/// one centered line and a warning.
SurveyPlan plan_grid_survey(const SlabExtents& slab, double line_spacing, double trace_spacing,
                            ScanAxis direction);

/// Adds zero-mean Gaussian jitter to horizontal positions (sigma = 0 is a no-op).
std::vector<SurveyPose> jitter_positions(std::vector<SurveyPose> poses, double sigma, Rng& rng);

/// `line x1 y1 x2 y2 trace_spacing`, one per scan line.
std::string format_survey(const SurveyPlan& plan);
SurveyPlan parse_survey(const std::string& text);
void save_survey(const SurveyPlan& plan, const std::filesystem::path& path);
SurveyPlan load_survey(const std::filesystem::path& path);

}  // namespace gpr::survey
