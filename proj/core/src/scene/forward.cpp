#include "gpr/scene/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gpr/common/error.hpp"
#include "gpr/common/random.hpp"

namespace gpr::scene {

double wave_speed(double permittivity) {
  if (!(permittivity >= 1.0)) {
    throw InvalidArgument("relative permittivity must be >= 1, got " + std::to_string(permittivity));
  }
  return kSpeedOfLight / std::sqrt(permittivity);
}

double two_way_travel_time(double antenna_x, double x, double depth, double permittivity) {
  const double v = wave_speed(permittivity);
  if (!(depth > 0.0)) throw InvalidArgument("scatterer depth must be > 0");
  const double dx = antenna_x - x;
  return 2.0 * std::sqrt(dx * dx + depth * depth) / v;
}

double ricker(double t_ns, double frequency_ghz) {
  const double a = std::numbers::pi * frequency_ghz * t_ns;
  const double a2 = a * a;
  return (1.0 - 2.0 * a2) * std::exp(-a2);
}

namespace {

void check_on_surface(const PipeScene& scene, const Vec3& p) {
  constexpr double tol = 1e-9;
  if (p.x < -tol || p.x > scene.slab.x + tol || p.y < -tol || p.y > scene.slab.y + tol || std::abs(p.z) > tol) {
    throw InvalidArgument("survey position (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " +
                          std::to_string(p.z) + ") is off the slab surface");
  }
}

}  // namespace

BScan synthesize_bscan(const PipeScene& scene, const std::vector<survey::SurveyPose>& poses, double trace_spacing,
                       const ForwardConfig& config) {
  scene.validate();
  if (poses.empty()) throw InvalidArgument("survey line has no traces");
  if (config.samples == 0 || !(config.dt_ns > 0.0)) throw InvalidArgument("forward config needs samples > 0, dt > 0");
  for (const auto& p : poses) check_on_surface(scene, p.position);

  BScan b;
  b.samples = config.samples;
  b.traces = poses.size();
  b.dt_ns = config.dt_ns;
  b.trace_spacing = trace_spacing;
  b.poses = poses;
  b.amplitude.assign(b.samples * b.traces, 0.0F);
  if (scene.pipes.empty()) return b;

  const double v = wave_speed(scene.permittivity);
  const double half_width = 2.5 / config.center_frequency_ghz;  // ns; wavelet is < 1e-26 beyond
  std::vector<double> trace(b.samples);
  for (std::size_t k = 0; k < b.traces; ++k) {
    std::fill(trace.begin(), trace.end(), 0.0);
    const Vec3 antenna = poses[k].position;
    for (const auto& pipe : scene.pipes) {
      const double range = std::max(distance_to_segment(antenna, pipe.start, pipe.end) - pipe.radius, 0.0);
      const double t_echo = 2.0 * range / v;
      const double gain = reflectivity(pipe.material) / std::max(range, config.min_range_m);
      const double lo = std::ceil((t_echo - half_width) / config.dt_ns);
      const double hi = std::floor((t_echo + half_width) / config.dt_ns);
      const auto first = static_cast<std::size_t>(std::max(lo, 0.0));
      if (hi < 0.0) continue;
      const auto last = std::min(static_cast<std::size_t>(hi), b.samples - 1);
      for (std::size_t i = first; i <= last && i < b.samples; ++i) {
        trace[i] += gain * ricker(static_cast<double>(i) * config.dt_ns - t_echo, config.center_frequency_ghz);
      }
    }
    for (std::size_t i = 0; i < b.samples; ++i) b.amplitude[i * b.traces + k] = static_cast<float>(trace[i]);
  }
  return b;
}

BScan synthesize_bscan(const PipeScene& scene, const survey::ScanLine& line, const ForwardConfig& config) {
  check_on_surface(scene, line.start);
  check_on_surface(scene, line.end);
  return synthesize_bscan(scene, line.poses(), line.trace_spacing, config);
}

std::vector<BScan> synthesize_survey(const PipeScene& scene, const survey::SurveyPlan& plan,
                                     const ForwardConfig& config) {
  std::vector<BScan> out;
  out.reserve(plan.lines.size());
  for (const auto& line : plan.lines) out.push_back(synthesize_bscan(scene, line, config));
  return out;
}

CrossSection ground_truth_cross_section(const PipeScene& scene, const SectionGeometry& geometry) {
  CrossSection cs;
  cs.geometry = geometry;
  cs.mask.assign(geometry.rows * geometry.cols, 0);
  for (std::size_t r = 0; r < geometry.rows; ++r) {
    for (std::size_t c = 0; c < geometry.cols; ++c) {
      const Vec3 p = geometry.position(r, c);
      for (const auto& pipe : scene.pipes) {
        if (pipe.contains(p)) {
          cs.mask[r * geometry.cols + c] = 1;
          break;
        }
      }
    }
  }
  return cs;
}

cloud::PointCloud ground_truth_dense_cloud(const PipeScene& scene, std::size_t n, std::uint64_t seed) {
  if (scene.pipes.empty()) throw InvalidArgument("dense cloud needs at least one pipe");
  std::vector<double> areas;
  for (const auto& p : scene.pipes) areas.push_back(p.lateral_area());
  Rng rng = make_rng(seed, 0x64656e7365ULL);
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Frame {
    Vec3 u, w;
  };
  std::vector<Frame> frames;
  for (const auto& p : scene.pipes) {
    const Vec3 axis = (1.0 / p.length()) * (p.end - p.start);
    const Vec3 helper = std::abs(axis.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    Vec3 u = cross(axis, helper);
    u = (1.0 / norm(u)) * u;
    frames.push_back({u, cross(axis, u)});
  }

  cloud::PointCloud out;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = pick(rng);
    const auto& pipe = scene.pipes[k];
    const double t = unit(rng);
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const Vec3 center = pipe.start + t * (pipe.end - pipe.start);
    out.points.push_back(center + pipe.radius * (std::cos(theta) * frames[k].u + std::sin(theta) * frames[k].w));
  }
  return out;
}

cloud::PointCloud add_gaussian_noise(const cloud::PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw InvalidArgument("noise sigma must be >= 0");
  cloud::PointCloud out = cloud;
  if (sigma == 0.0) return out;
  Rng rng = make_rng(seed, 0x6e6f697365ULL);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& p : out.points) {
    p.x += noise(rng);
    p.y += noise(rng);
    p.z += noise(rng);
  }
  return out;
}

BScan add_gaussian_noise(const BScan& bscan, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw InvalidArgument("noise sigma must be >= 0");
  BScan out = bscan;
  if (sigma == 0.0) return out;
  Rng rng = make_rng(seed, 0x6e6f697365ULL);
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& a : out.amplitude) a = static_cast<float>(a + noise(rng));
  return out;
}

}  // namespace gpr::scene
