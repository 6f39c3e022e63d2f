#include "gpr/cloud/registration.hpp"

#include <algorithm>
#include <numeric>

#include "gpr/common/error.hpp"
#include "gpr/common/random.hpp"

namespace gpr::cloud {

PointCloud register_cross_sections(const std::vector<scene::CrossSection>& sections) {
  PointCloud out;
  for (const auto& s : sections) {
    if (s.mask.size() != s.rows() * s.cols()) throw InvalidArgument("cross-section mask size mismatch");
    for (std::size_t r = 0; r < s.rows(); ++r) {
      for (std::size_t c = 0; c < s.cols(); ++c) {
        if (s.at(r, c)) out.points.push_back(s.geometry.position(r, c));
      }
    }
  }
  if (out.empty()) throw DataError("no detections");
  return out;
}

PointCloud resample(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
  if (cloud.empty()) throw InvalidArgument("cannot resample an empty cloud");
  Rng rng = make_rng(seed, 0x726573616d706c65ULL);
  PointCloud out;
  out.points.reserve(n);
  if (cloud.size() >= n) {
    std::vector<std::size_t> idx(cloud.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) out.points.push_back(cloud[i]);
  } else {
    out.points = cloud.points;
    std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
    while (out.size() < n) out.points.push_back(cloud[pick(rng)]);
  }
  return out;
}

}  // namespace gpr::cloud
