#pragma once

#include <filesystem>
#include <iosfwd>

#include "gpr/cloud/point_cloud.hpp"

namespace gpr::cloud {

/// ASCII PLY with a single `vertex` element. Coordinates are written in
/// shortest round-trip decimal, so read(write(c)) is bit-exact.
void write_ply(std::ostream& out, const PointCloud& cloud);
/// Accepts `float` or `double` x/y/z plus extra scalar vertex properties.
/// Throws FormatError naming the offending line on malformed input.
PointCloud read_ply(std::istream& in);

void save_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud load_ply(const std::filesystem::path& path);

}  // namespace gpr::cloud
