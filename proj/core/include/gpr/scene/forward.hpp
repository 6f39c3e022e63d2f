#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gpr/cloud/point_cloud.hpp"
#include "gpr/scene/bscan.hpp"
#include "gpr/scene/cross_section.hpp"
#include "gpr/scene/scene.hpp"

namespace gpr::scene {

inline constexpr double kSpeedOfLight = 0.299792458;  // m/ns

/// Propagation speed c / sqrt(eps_r) in m/ns. Throws for eps_r < 1.
double wave_speed(double permittivity);

/// Two-way time (ns) from an antenna on the surface at lateral position
/// `antenna_x` to a scatterer at (`x`, `depth`) and back.
double two_way_travel_time(double antenna_x, double x, double depth, double permittivity);

/// Ricker wavelet (1 - 2 (pi f t)^2) exp(-(pi f t)^2), f in GHz, t in ns.
double ricker(double t_ns, double frequency_ghz);

struct ForwardConfig {
  std::size_t samples = 256;
  double dt_ns = 0.1;
  double center_frequency_ghz = 1.5;
  /// Floor for the 1/r spreading term so shallow echoes stay bounded.
  double min_range_m = 0.02;
};

/// Kinematic radargram of one scan line: every pipe adds a Ricker echo per
/// trace, delayed by the two-way time to its nearest surface point and
/// scaled by reflectivity / range. Throws InvalidArgument when the line
/// leaves the slab surface.
BScan synthesize_bscan(const PipeScene& scene, const survey::ScanLine& line, const ForwardConfig& config = {});
/// Same, with explicit (possibly jittered) trace poses.
BScan synthesize_bscan(const PipeScene& scene, const std::vector<survey::SurveyPose>& poses,
                       double trace_spacing, const ForwardConfig& config = {});
std::vector<BScan> synthesize_survey(const PipeScene& scene, const survey::SurveyPlan& plan,
                                     const ForwardConfig& config = {});

/// Cell = 1 iff its grid node lies inside any pipe.
CrossSection ground_truth_cross_section(const PipeScene& scene, const SectionGeometry& geometry);

inline constexpr std::size_t kDenseCloudSize = 8064;

/// `n` points uniformly distributed by area over the pipes' lateral surfaces.
cloud::PointCloud ground_truth_dense_cloud(const PipeScene& scene, std::size_t n, std::uint64_t seed);

/// i.i.d. N(0, sigma^2) added to every coordinate / amplitude. sigma = 0
/// returns an exact copy; negative sigma throws.
cloud::PointCloud add_gaussian_noise(const cloud::PointCloud& cloud, double sigma, std::uint64_t seed);
BScan add_gaussian_noise(const BScan& bscan, double sigma, std::uint64_t seed);

}  // namespace gpr::scene
