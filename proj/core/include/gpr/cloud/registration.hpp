#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gpr/cloud/point_cloud.hpp"
#include "gpr/scene/cross_section.hpp"

namespace gpr::cloud {

/// Places every occupied cell of every section at its georeferenced world
/// position (lateral along the scan axis, depth as negative z) and returns
/// the union. Throws DataError("no detections") when all sections are empty.
PointCloud register_cross_sections(const std::vector<scene::CrossSection>& sections);

/// Exactly `n` points: a uniform subsample without replacement when the
/// cloud is large enough, otherwise every point plus uniform draws with
/// replacement. Deterministic per seed.
PointCloud resample(const PointCloud& cloud, std::size_t n, std::uint64_t seed);

inline constexpr std::size_t kSparseCloudSize = 1500;

}  // namespace gpr::cloud
