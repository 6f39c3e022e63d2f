#include "manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "gpr/common/error.hpp"
#include "json.hpp"

#ifndef GPR_VERSION
#define GPR_VERSION "0.0.0"
#endif

namespace gpr::tools {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Manifest::Manifest(std::string command, std::filesystem::path out_dir)
    : command_(std::move(command)), out_dir_(std::move(out_dir)) {}

void Manifest::output(const std::filesystem::path& p) {
  outputs_.push_back(p.lexically_relative(out_dir_).generic_string());
}

void Manifest::start(const std::string& stage) { open_.emplace_back(stage, std::chrono::steady_clock::now()); }

void Manifest::stop(const std::string& stage) {
  auto it = std::find_if(open_.begin(), open_.end(), [&](const auto& e) { return e.first == stage; });
  if (it == open_.end()) return;
  timings_.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - it->second).count());
  open_.erase(it);
}

void Manifest::write() const {
  nlohmann::ordered_json j;
  j["tool"] = "gpr-recon";
  j["version"] = GPR_VERSION;
  j["command"] = command_;
  j["seed"] = std::stoull(settings_.get_or("seed", std::string("0")));
  j["config_hash"] = fnv1a_hex(command_ + "\n" + settings_.dump());
  j["settings"] = nlohmann::ordered_json(settings_.entries());
  j["inputs"] = inputs_;
  auto outputs = outputs_;
  std::sort(outputs.begin(), outputs.end());
  j["outputs"] = outputs;
  nlohmann::ordered_json timings = nlohmann::ordered_json::object();
  for (const auto& [stage, s] : timings_) timings[stage] = s;
  j["timings_s"] = timings;
  char stamp[32];
  const std::time_t now = std::time(nullptr);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["timestamp"] = stamp;

  const auto path = out_dir_ / "manifest.json";
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace gpr::tools
