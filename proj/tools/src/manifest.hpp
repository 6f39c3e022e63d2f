#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gpr/common/config.hpp"

namespace gpr::tools {

/// Bookkeeping for one command run, written as manifest.json into the
/// output directory. Only `timestamp` and `timings_s` vary between runs
/// with identical settings.
class Manifest {
 public:
  Manifest(std::string command, std::filesystem::path out_dir);

  /// Resolved settings; hashed into `config_hash`.
  KeyValueConfig& settings() { return settings_; }
  void input(const std::filesystem::path& p) { inputs_.push_back(p.generic_string()); }
  /// Records an artifact by its path relative to the output directory.
  void output(const std::filesystem::path& p);

  /// Times a stage; call stop() with the same name to close it.
  void start(const std::string& stage);
  void stop(const std::string& stage);

  void write() const;
  const std::filesystem::path& out_dir() const { return out_dir_; }

 private:
  std::string command_;
  std::filesystem::path out_dir_;
  KeyValueConfig settings_;
  std::vector<std::string> inputs_, outputs_;
  std::vector<std::pair<std::string, double>> timings_;
  std::vector<std::pair<std::string, std::chrono::steady_clock::time_point>> open_;
};

/// FNV-1a 64-bit hash, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace gpr::tools
