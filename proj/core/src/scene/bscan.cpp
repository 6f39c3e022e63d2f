#include "gpr/scene/bscan.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "gpr/common/binary_io.hpp"
#include "gpr/common/error.hpp"

namespace gpr::scene {

void BScan::validate() const {
  if (samples == 0 || traces == 0) throw InvalidArgument("B-scan needs T, K > 0");
  if (poses.size() != traces) {
    throw InvalidArgument("B-scan has " + std::to_string(traces) + " traces but " + std::to_string(poses.size()) + " poses");
  }
  if (amplitude.size() != samples * traces) throw InvalidArgument("B-scan amplitude grid has the wrong size");
  for (float a : amplitude) {
    if (!std::isfinite(a)) throw InvalidArgument("B-scan contains non-finite amplitudes");
  }
}

void write_bscan(std::ostream& out, const BScan& b) {
  b.validate();
  io::write_magic(out, "GPRB");
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.samples));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(b.traces));
  io::write_le<double>(out, b.dt_ns);
  io::write_le<double>(out, b.trace_spacing);
  for (const auto& p : b.poses) {
    io::write_le<double>(out, p.position.x);
    io::write_le<double>(out, p.position.y);
    io::write_le<double>(out, p.position.z);
  }
  io::write_array(out, b.amplitude.data(), b.amplitude.size());
}

BScan read_bscan(std::istream& in) {
  io::expect_magic(in, "GPRB");
  BScan b;
  b.samples = io::read_le<std::uint32_t>(in, "T");
  b.traces = io::read_le<std::uint32_t>(in, "K");
  if (b.samples == 0 || b.traces == 0) throw FormatError("B-scan header has a zero dimension");
  b.dt_ns = io::read_le<double>(in, "dt");
  b.trace_spacing = io::read_le<double>(in, "trace spacing");
  b.poses.resize(b.traces);
  for (auto& p : b.poses) {
    p.position.x = io::read_le<double>(in, "pose");
    p.position.y = io::read_le<double>(in, "pose");
    p.position.z = io::read_le<double>(in, "pose");
  }
  b.amplitude.resize(b.samples * b.traces);
  io::read_array(in, b.amplitude.data(), b.amplitude.size(), "amplitudes");
  return b;
}

void save_bscan(const BScan& bscan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write B-scan " + path.string());
  write_bscan(out, bscan);
}

BScan load_bscan(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open B-scan " + path.string());
  return read_bscan(in);
}

}  // namespace gpr::scene
