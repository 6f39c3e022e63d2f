#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "gpr/survey/plan.hpp"

namespace gpr::scene {

/// Radargram: `samples` time rows by `traces` columns, row-major, with one
/// antenna pose per trace.
struct BScan {
  std::size_t samples = 0;
  std::size_t traces = 0;
  double dt_ns = 0.0;
  double trace_spacing = 0.0;  // m
  std::vector<survey::SurveyPose> poses;
  std::vector<float> amplitude;

  float at(std::size_t sample, std::size_t trace) const { return amplitude[sample * traces + trace]; }
  float& at(std::size_t sample, std::size_t trace) { return amplitude[sample * traces + trace]; }

  /// Throws InvalidArgument if dimensions, poses or amplitudes are inconsistent.
  void validate() const;
};

// Binary layout (little-endian):
//   "GPRB" | u32 T | u32 K | f64 dt_ns | f64 trace_spacing_m |
//   K poses (x, y, z as f64) | T*K f32 amplitudes, row-major
void write_bscan(std::ostream& out, const BScan& bscan);
BScan read_bscan(std::istream& in);
void save_bscan(const BScan& bscan, const std::filesystem::path& path);
BScan load_bscan(const std::filesystem::path& path);

}  // namespace gpr::scene
