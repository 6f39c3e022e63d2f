#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "gpr/common/geometry.hpp"
#include "gpr/common/random.hpp"
#include "gpr/survey/plan.hpp"

namespace gpr::scene {

/// Buried cylinder with a round cross-section. The axis runs from `start`
/// to `end`; z is negative below the surface.
struct Pipe {
  Vec3 start;
  Vec3 end;
  double radius = 0.0;  // m
  std::string material = "pvc";

  double length() const { return norm(end - start); }
  double lateral_area() const;
  /// True if p lies inside the cylinder (distance to the axis segment <= radius).
  bool contains(const Vec3& p) const;
};

struct PipeScene {
  survey::SlabExtents slab;
  double permittivity = 1.0;  // relative, dimensionless
  std::vector<Pipe> pipes;

  /// Throws InvalidArgument unless every pipe sits inside the slab with a
  /// positive radius and the permittivity is >= 1.
  void validate() const;
};

/// Echo strength per material tag; unknown tags fall back to 0.7.
double reflectivity(const std::string& material);

/// `slab x y z eps_r` header then `pipe x1 y1 z1 x2 y2 z2 radius material`.
std::string format_scene(const PipeScene& scene);
PipeScene parse_scene(const std::string& text);
void save_scene(const PipeScene& scene, const std::filesystem::path& path);
PipeScene load_scene(const std::filesystem::path& path);

/// 2 m x 2 m x 0.6 m slab with two pipes crossing an x-directed survey.
PipeScene demo_scene();

struct RandomSceneOptions {
  survey::SlabExtents slab{2.0, 2.0, 0.6};
  double min_permittivity = 4.0;
  double max_permittivity = 9.0;
  std::size_t min_pipes = 1;
  std::size_t max_pipes = 3;
  double min_radius = 0.03;
  double max_radius = 0.1;
  double min_depth = 0.12;  // axis depth below the surface
  double max_depth = 0.45;
  double max_skew = 0.35;             // rad, deviation from the y axis
  double parallel_probability = 0.15;  // chance a pipe runs along x instead
};

/// Random non-intersecting pipes; the first pipe always runs roughly along y
/// so an x-directed survey crosses it.
PipeScene random_scene(Rng& rng, const RandomSceneOptions& options = {});

}  // namespace gpr::scene
