#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gpr {

/// Line-oriented `key value` configuration. `#` starts a comment; later
/// keys override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_or(const std::string& key, double fallback) const;
  std::int64_t get_or(const std::string& key, std::int64_t fallback) const;
  std::vector<double> get_list_or(const std::string& key, std::vector<double> fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  /// Canonical `key value\n` dump, sorted by key.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Parses "0.05,0.1,0.2" style lists.
std::vector<double> parse_double_list(const std::string& text);

}  // namespace gpr
