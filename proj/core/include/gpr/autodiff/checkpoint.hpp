#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "gpr/autodiff/layers.hpp"

namespace gpr::ad {

// Binary layout (little-endian):
//   "GPRN" | u16 version | u32 tensor count
//   per tensor: u16 name length | UTF-8 name | u8 dtype (0 = f64) | u8 rank |
//               u32 dims[rank] | raw data
inline constexpr std::uint16_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const NamedTensors& params);
NamedTensors read_checkpoint(std::istream& in);

void save_checkpoint(const NamedTensors& params, const std::filesystem::path& path);
NamedTensors load_checkpoint(const std::filesystem::path& path);

/// Exact byte size save_checkpoint will produce.
std::uint64_t checkpoint_size(const NamedTensors& params);

}  // namespace gpr::ad
