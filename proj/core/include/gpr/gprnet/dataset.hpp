#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "gpr/cloud/point_cloud.hpp"
#include "gpr/scene/bscan.hpp"
#include "gpr/scene/forward.hpp"
#include "gpr/scene/scene.hpp"
#include "gpr/survey/plan.hpp"

namespace gpr::gprnet {

/// How sparse input clouds are produced from a scene.
enum class SparseSource {
  GroundTruth,     // registered ground-truth cross-sections
  BackProjection,  // simulated B-scans, migrated and thresholded
};

struct SurveyConfig {
  double line_spacing = 0.2;   // m
  double trace_spacing = 0.02; // m
  survey::ScanAxis direction = survey::ScanAxis::X;
  std::size_t section_rows = 128;
  std::size_t section_cols = 128;
  double threshold = 0.5;  // fraction of the per-section maximum
  scene::ForwardConfig forward;
};

/// Back-projects every B-scan onto the section of its scan line, thresholds
/// it and registers the detections. Throws DataError("no detections") when
/// nothing survives the threshold.
cloud::PointCloud sparse_cloud_from_bscans(const std::vector<scene::BScan>& bscans,
                                           const survey::SurveyPlan& plan, double permittivity,
                                           const SurveyConfig& config);
cloud::PointCloud sparse_cloud_from_ground_truth(const scene::PipeScene& scene, const survey::SurveyPlan& plan,
                                                 const SurveyConfig& config);

struct Sample {
  cloud::PointCloud sparse;  // 1500 points
  cloud::PointCloud dense;   // 8064 points
};

Sample make_sample(const scene::PipeScene& scene, SparseSource source, const SurveyConfig& config,
                   std::uint64_t seed);

/// `count` random scenes and their samples; scene i uses stream i of `seed`.
/// Scenes whose survey detects nothing are redrawn.
std::vector<Sample> make_dataset(std::size_t count, SparseSource source, const SurveyConfig& config,
                                 std::uint64_t seed, const scene::RandomSceneOptions& options = {});

struct Split {
  std::vector<std::size_t> train, validation, test;
};

/// Seeded permutation: first `validation` indices, then `test`, the rest
/// train. Throws InvalidArgument when validation + test > n.
Split split_dataset(std::size_t n, std::size_t validation, std::size_t test, std::uint64_t seed);

/// Directory layout: sample_NNNN.sparse.ply / sample_NNNN.dense.ply.
void save_dataset(const std::vector<Sample>& samples, const std::filesystem::path& dir);
/// Throws DataError for a missing directory or one without samples.
std::vector<Sample> load_dataset(const std::filesystem::path& dir);

}  // namespace gpr::gprnet
