#include "gpr/scene/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "gpr/common/error.hpp"

namespace gpr::scene {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

bool inside(double v, double lo, double hi) { return v >= lo - 1e-12 && v <= hi + 1e-12; }

double segment_distance(const Pipe& a, const Pipe& b) {
  double best = std::numeric_limits<double>::infinity();
  constexpr int kSamples = 64;
  for (int i = 0; i <= kSamples; ++i) {
    const double t = static_cast<double>(i) / kSamples;
    best = std::min(best, distance_to_segment(a.start + t * (a.end - a.start), b.start, b.end));
  }
  return best;
}

}  // namespace

double Pipe::lateral_area() const { return 2.0 * std::numbers::pi * radius * length(); }

bool Pipe::contains(const Vec3& p) const { return distance_to_segment(p, start, end) <= radius; }

void PipeScene::validate() const {
  if (!(slab.x > 0.0 && slab.y > 0.0 && slab.z > 0.0)) throw InvalidArgument("slab extents must be positive");
  if (!(permittivity >= 1.0)) throw InvalidArgument("relative permittivity must be >= 1, got " + fmt(permittivity));
  for (std::size_t i = 0; i < pipes.size(); ++i) {
    const Pipe& p = pipes[i];
    const std::string tag = "pipe " + std::to_string(i) + ": ";
    if (!(p.radius > 0.0)) throw InvalidArgument(tag + "radius must be > 0");
    if (p.length() == 0.0) throw InvalidArgument(tag + "degenerate axis");
    for (const Vec3& e : {p.start, p.end}) {
      if (!inside(e.x, 0.0, slab.x) || !inside(e.y, 0.0, slab.y) || !inside(e.z + p.radius, -slab.z, 0.0) ||
          !inside(e.z - p.radius, -slab.z, 0.0)) {
        throw InvalidArgument(tag + "lies outside the slab");
      }
    }
  }
}

double reflectivity(const std::string& material) {
  if (material == "metal" || material == "rebar" || material == "steel") return 1.0;
  if (material == "pvc" || material == "plastic") return 0.5;
  if (material == "void" || material == "air") return 0.6;
  return 0.7;
}

std::string format_scene(const PipeScene& scene) {
  std::string out = "slab " + fmt(scene.slab.x) + " " + fmt(scene.slab.y) + " " + fmt(scene.slab.z) + " " +
                    fmt(scene.permittivity) + "\n";
  for (const auto& p : scene.pipes) {
    out += "pipe " + fmt(p.start.x) + " " + fmt(p.start.y) + " " + fmt(p.start.z) + " " + fmt(p.end.x) + " " +
           fmt(p.end.y) + " " + fmt(p.end.z) + " " + fmt(p.radius) + " " + p.material + "\n";
  }
  return out;
}

PipeScene parse_scene(const std::string& text) {
  PipeScene scene;
  bool have_slab = false;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& why) -> FormatError {
    return FormatError("scene line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "slab") {
      if (have_slab) throw fail("duplicate slab header");
      if (!(ls >> scene.slab.x >> scene.slab.y >> scene.slab.z >> scene.permittivity)) {
        throw fail("expected 'slab x y z eps_r'");
      }
      have_slab = true;
    } else if (tag == "pipe") {
      if (!have_slab) throw fail("pipe before slab header");
      Pipe p;
      if (!(ls >> p.start.x >> p.start.y >> p.start.z >> p.end.x >> p.end.y >> p.end.z >> p.radius >> p.material)) {
        throw fail("expected 'pipe x1 y1 z1 x2 y2 z2 radius material'");
      }
      scene.pipes.push_back(p);
    } else {
      throw fail("unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) throw fail("trailing token '" + extra + "'");
  }
  if (!have_slab) throw FormatError("scene has no slab header");
  try {
    scene.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid scene: ") + e.what());
  }
  return scene;
}

void save_scene(const PipeScene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write scene " + path.string());
  out << format_scene(scene);
}

PipeScene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scene " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

PipeScene demo_scene() {
  PipeScene s;
  s.slab = {2.0, 2.0, 0.6};
  s.permittivity = 6.25;
  s.pipes.push_back({{0.6, 0.0, -0.25}, {0.6, 2.0, -0.25}, 0.05, "pvc"});
  s.pipes.push_back({{1.2, 0.0, -0.4}, {1.55, 2.0, -0.4}, 0.08, "metal"});
  return s;
}

PipeScene random_scene(Rng& rng, const RandomSceneOptions& o) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  PipeScene s;
  s.slab = o.slab;
  s.permittivity = uniform(o.min_permittivity, o.max_permittivity);
  const auto count = o.min_pipes + static_cast<std::size_t>(unit(rng) * static_cast<double>(o.max_pipes - o.min_pipes + 1));
  const std::size_t target = std::min(count, o.max_pipes);
  int attempts = 0;
  while (s.pipes.size() < target && attempts < 1000) {
    ++attempts;
    Pipe p;
    p.radius = uniform(o.min_radius, o.max_radius);
    const double depth = uniform(std::max(o.min_depth, p.radius + 0.01), std::min(o.max_depth, o.slab.z - p.radius - 0.01));
    p.material = unit(rng) < 0.5 ? "pvc" : "metal";
    const bool parallel = !s.pipes.empty() && unit(rng) < o.parallel_probability;
    const double skew = uniform(-o.max_skew, o.max_skew);
    const double margin = 0.1;
    if (!parallel) {
      const double half = std::tan(skew) * o.slab.y / 2.0;
      const double lo = margin + std::abs(half), hi = o.slab.x - margin - std::abs(half);
      if (lo >= hi) continue;
      const double c = uniform(lo, hi);
      p.start = {c - half, 0.0, -depth};
      p.end = {c + half, o.slab.y, -depth};
    } else {
      const double half = std::tan(skew * 0.2) * o.slab.x / 2.0;
      const double lo = margin + std::abs(half), hi = o.slab.y - margin - std::abs(half);
      if (lo >= hi) continue;
      const double c = uniform(lo, hi);
      p.start = {0.0, c - half, -depth};
      p.end = {o.slab.x, c + half, -depth};
    }
    bool clear = true;
    for (const auto& q : s.pipes) {
      if (segment_distance(p, q) < p.radius + q.radius + 0.05) clear = false;
    }
    if (clear) s.pipes.push_back(p);
  }
  s.validate();
  return s;
}

}  // namespace gpr::scene
