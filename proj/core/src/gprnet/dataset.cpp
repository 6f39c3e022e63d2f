#include "gpr/gprnet/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <string>

#include "gpr/cloud/ply.hpp"
#include "gpr/cloud/registration.hpp"
#include "gpr/common/error.hpp"
#include "gpr/common/random.hpp"
#include "gpr/migration/backproject.hpp"

namespace gpr::gprnet {

namespace {

survey::SurveyPlan plan_for(const scene::PipeScene& scene, const SurveyConfig& config) {
  return survey::plan_grid_survey(scene.slab, config.line_spacing, config.trace_spacing, config.direction);
}

}  // namespace

cloud::PointCloud sparse_cloud_from_bscans(const std::vector<scene::BScan>& bscans,
                                           const survey::SurveyPlan& plan, double permittivity,
                                           const SurveyConfig& config) {
  if (bscans.size() != plan.lines.size()) {
    throw InvalidArgument(std::to_string(bscans.size()) + " B-scans for " + std::to_string(plan.lines.size()) +
                          " scan lines");
  }
  std::vector<scene::CrossSection> sections;
  for (std::size_t i = 0; i < bscans.size(); ++i) {
    const auto geom = scene::section_for_line(plan.lines[i], config.section_rows, config.section_cols);
    const auto image = migration::backproject(bscans[i], geom, permittivity);
    sections.push_back(migration::threshold_to_cross_section(image, config.threshold));
  }
  return cloud::register_cross_sections(sections);
}

cloud::PointCloud sparse_cloud_from_ground_truth(const scene::PipeScene& scene, const survey::SurveyPlan& plan,
                                                 const SurveyConfig& config) {
  std::vector<scene::CrossSection> sections;
  for (const auto& line : plan.lines) {
    sections.push_back(scene::ground_truth_cross_section(
        scene, scene::section_for_line(line, config.section_rows, config.section_cols)));
  }
  return cloud::register_cross_sections(sections);
}

Sample make_sample(const scene::PipeScene& scene, SparseSource source, const SurveyConfig& config,
                   std::uint64_t seed) {
  scene.validate();
  const auto plan = plan_for(scene, config);
  cloud::PointCloud raw;
  if (source == SparseSource::GroundTruth) {
    raw = sparse_cloud_from_ground_truth(scene, plan, config);
  } else {
    raw = sparse_cloud_from_bscans(scene::synthesize_survey(scene, plan, config.forward), plan,
                                   scene.permittivity, config);
  }
  return {cloud::resample(raw, cloud::kSparseCloudSize, split_seed(seed, 1)),
          scene::ground_truth_dense_cloud(scene, scene::kDenseCloudSize, split_seed(seed, 2))};
}

std::vector<Sample> make_dataset(std::size_t count, SparseSource source, const SurveyConfig& config,
                                 std::uint64_t seed, const scene::RandomSceneOptions& options) {
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t child = split_seed(seed, i);
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng = make_rng(child, attempt);
      const auto scene = scene::random_scene(rng, options);
      try {
        out.push_back(make_sample(scene, source, config, split_seed(child, attempt)));
        break;
      } catch (const DataError&) {
        if (attempt >= 16) throw;
      }
    }
  }
  return out;
}

Split split_dataset(std::size_t n, std::size_t validation, std::size_t test, std::uint64_t seed) {
  if (validation + test > n) {
    throw InvalidArgument("split needs " + std::to_string(validation + test) + " held-out samples but only " +
                          std::to_string(n) + " exist");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, 0);
  std::shuffle(order.begin(), order.end(), rng);
  Split s;
  s.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(validation));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(validation),
                order.begin() + static_cast<std::ptrdiff_t>(validation + test));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(validation + test), order.end());
  return s;
}

namespace {

std::string sample_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%04zu", i);
  return buf;
}

}  // namespace

void save_dataset(const std::vector<Sample>& samples, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    cloud::save_ply(samples[i].sparse, dir / (sample_stem(i) + ".sparse.ply"));
    cloud::save_ply(samples[i].dense, dir / (sample_stem(i) + ".dense.ply"));
  }
}

std::vector<Sample> load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("dataset directory not found: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".sparse.ply";
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      stems.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  if (stems.empty()) throw DataError("dataset directory holds no samples: " + dir.string());
  std::sort(stems.begin(), stems.end());
  std::vector<Sample> out;
  for (const auto& stem : stems) {
    Sample s{cloud::load_ply(dir / (stem + ".sparse.ply")), cloud::load_ply(dir / (stem + ".dense.ply"))};
    if (s.sparse.size() != cloud::kSparseCloudSize || s.dense.empty()) {
      throw DataError(stem + ": expected 1500 sparse points and a nonempty dense cloud");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gpr::gprnet
