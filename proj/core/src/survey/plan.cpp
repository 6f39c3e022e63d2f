#include "gpr/survey/plan.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gpr/common/error.hpp"

namespace gpr::survey {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

Vec3 axis_direction(ScanAxis axis) { return axis == ScanAxis::X ? Vec3{1, 0, 0} : Vec3{0, 1, 0}; }

ScanAxis ScanLine::axis() const {
  const Vec3 d = end - start;
  return std::abs(d.x) >= std::abs(d.y) ? ScanAxis::X : ScanAxis::Y;
}

double ScanLine::length() const { return norm(end - start); }

std::size_t ScanLine::trace_count() const {
  return static_cast<std::size_t>(std::floor(length() / trace_spacing + 1e-9)) + 1;
}

std::vector<SurveyPose> ScanLine::poses(double speed_m_per_s) const {
  const std::size_t k = trace_count();
  const double len = length();
  const Vec3 dir = len > 0.0 ? (1.0 / len) * (end - start) : Vec3{};
  std::vector<SurveyPose> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double s = static_cast<double>(i) * trace_spacing;
    out.push_back({start + s * dir, s / speed_m_per_s});
  }
  return out;
}

SurveyPlan plan_grid_survey(const SlabExtents& slab, double line_spacing, double trace_spacing,
                            ScanAxis direction) {
  if (!(line_spacing > 0.0) || !(trace_spacing > 0.0)) {
    throw InvalidArgument("line and trace spacing must be positive");
  }
  const double along = direction == ScanAxis::X ? slab.x : slab.y;
  const double across = direction == ScanAxis::X ? slab.y : slab.x;
  if (!(along > 0.0) || !(across > 0.0)) throw InvalidArgument("slab extents must be positive");
  if (trace_spacing > along) throw InvalidArgument("trace spacing exceeds the scan-line length");

  SurveyPlan plan;
  plan.line_spacing = line_spacing;
  plan.direction = direction;
  std::vector<double> offsets;
  if (line_spacing > across) {
    offsets.push_back(across / 2.0);
    plan.warning = "line spacing " + fmt(line_spacing) + " m exceeds slab extent " + fmt(across) +
                   " m; using a single centered line";
  } else {
    const auto count = static_cast<std::size_t>(std::floor(across / line_spacing + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) offsets.push_back(static_cast<double>(i) * line_spacing);
  }
  for (double c : offsets) {
    ScanLine line;
    line.trace_spacing = trace_spacing;
    if (direction == ScanAxis::X) {
      line.start = {0.0, c, 0.0};
      line.end = {along, c, 0.0};
    } else {
      line.start = {c, 0.0, 0.0};
      line.end = {c, along, 0.0};
    }
    plan.lines.push_back(line);
  }
  return plan;
}

std::vector<SurveyPose> jitter_positions(std::vector<SurveyPose> poses, double sigma, Rng& rng) {
  if (sigma < 0.0) throw InvalidArgument("jitter sigma must be >= 0");
  if (sigma == 0.0) return poses;
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& p : poses) {
    p.position.x += noise(rng);
    p.position.y += noise(rng);
  }
  return poses;
}

std::string format_survey(const SurveyPlan& plan) {
  std::string out = "# line x1 y1 x2 y2 trace_spacing\n";
  for (const auto& l : plan.lines) {
    out += "line " + fmt(l.start.x) + " " + fmt(l.start.y) + " " + fmt(l.end.x) + " " + fmt(l.end.y) + " " +
           fmt(l.trace_spacing) + "\n";
  }
  return out;
}

SurveyPlan parse_survey(const std::string& text) {
  SurveyPlan plan;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag != "line") throw FormatError("survey line " + std::to_string(lineno) + ": unknown record '" + tag + "'");
    ScanLine l;
    if (!(ls >> l.start.x >> l.start.y >> l.end.x >> l.end.y >> l.trace_spacing)) {
      throw FormatError("survey line " + std::to_string(lineno) + ": expected 'line x1 y1 x2 y2 trace_spacing'");
    }
    std::string extra;
    if (ls >> extra) throw FormatError("survey line " + std::to_string(lineno) + ": trailing token '" + extra + "'");
    if (!(l.trace_spacing > 0.0)) throw FormatError("survey line " + std::to_string(lineno) + ": trace spacing must be > 0");
    const bool x_line = l.start.y == l.end.y && l.start.x != l.end.x;
    const bool y_line = l.start.x == l.end.x && l.start.y != l.end.y;
    if (!x_line && !y_line) {
      throw FormatError("survey line " + std::to_string(lineno) + ": scan lines must be axis-aligned and non-degenerate");
    }
    plan.lines.push_back(l);
  }
  if (plan.lines.empty()) throw FormatError("survey has no lines");
  plan.direction = plan.lines.front().axis();
  if (plan.lines.size() > 1) {
    const auto a = plan.lines[0].start, b = plan.lines[1].start;
    plan.line_spacing = plan.direction == ScanAxis::X ? std::abs(b.y - a.y) : std::abs(b.x - a.x);
  }
  return plan;
}

void save_survey(const SurveyPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write survey " + path.string());
  out << format_survey(plan);
}

SurveyPlan load_survey(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open survey " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_survey(ss.str());
}

}  // namespace gpr::survey
