#include "gpr/autodiff/checkpoint.hpp"

#include <fstream>
#include <limits>
#include <set>

#include "gpr/common/binary_io.hpp"
#include "gpr/common/error.hpp"

namespace gpr::ad {

namespace {
constexpr std::uint8_t kDtypeF64 = 0;
}

void write_checkpoint(std::ostream& out, const NamedTensors& params) {
  std::set<std::string> names;
  for (const auto& [name, t] : params) {
    if (!names.insert(name).second) throw InvalidArgument("duplicate parameter name '" + name + "'");
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw InvalidArgument("parameter name too long");
  }
  io::write_magic(out, "GPRN");
  io::write_le<std::uint16_t>(out, kCheckpointVersion);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    io::write_le<std::uint8_t>(out, kDtypeF64);
    io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.shape()) io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    io::write_array(out, t.data().data(), t.numel());
  }
}

NamedTensors read_checkpoint(std::istream& in) {
  io::expect_magic(in, "GPRN");
  const auto version = io::read_le<std::uint16_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = io::read_le<std::uint32_t>(in, "tensor count");
  NamedTensors out;
  std::set<std::string> names;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = io::read_le<std::uint16_t>(in, "name length");
    std::string name(len, '\0');
    io::read_array(in, name.data(), len, "name");
    if (!names.insert(name).second) throw FormatError("duplicate tensor name '" + name + "'");
    const auto dtype = io::read_le<std::uint8_t>(in, "dtype");
    if (dtype != kDtypeF64) throw FormatError("unsupported dtype code " + std::to_string(dtype));
    const auto rank = io::read_le<std::uint8_t>(in, "rank");
    Shape shape;
    for (std::uint8_t r = 0; r < rank; ++r) {
      const auto d = io::read_le<std::uint32_t>(in, "dims");
      if (d == 0) throw FormatError("zero dimension in tensor '" + name + "'");
      shape.push_back(d);
    }
    std::vector<double> data(element_count(shape));
    io::read_array(in, data.data(), data.size(), "tensor data");
    out.emplace_back(std::move(name), Tensor::from_data(std::move(shape), std::move(data), true));
  }
  return out;
}

void save_checkpoint(const NamedTensors& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  write_checkpoint(out, params);
  if (!out) throw DataError("write failed for " + path.string());
}

NamedTensors load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

std::uint64_t checkpoint_size(const NamedTensors& params) {
  std::uint64_t size = 4 + 2 + 4;
  for (const auto& [name, t] : params) {
    size += 2 + name.size() + 1 + 1 + 4 * t.rank() + 8 * t.numel();
  }
  return size;
}

}  // namespace gpr::ad
