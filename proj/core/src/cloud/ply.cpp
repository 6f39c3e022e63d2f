#include "gpr/cloud/ply.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gpr/common/error.hpp"

namespace gpr::cloud {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  std::string line;
  for (const auto& p : cloud.points) {
    line.clear();
    append_number(line, p.x);
    line += ' ';
    append_number(line, p.y);
    line += ' ';
    append_number(line, p.z);
    line += '\n';
    out << line;
  }
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) { return FormatError("PLY line " + std::to_string(lineno) + ": " + why); };
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next() || line != "ply") throw fail("missing 'ply' signature");
  std::size_t count = 0;
  bool have_vertex = false, in_vertex = false, ascii = false;
  std::vector<std::string> props;
  while (true) {
    if (!next()) throw fail("unexpected end of header");
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "end_header") break;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string kind;
      ls >> kind;
      if (kind != "ascii") throw fail("only ASCII PLY is supported, got '" + kind + "'");
      ascii = true;
    } else if (word == "element") {
      std::string name;
      long long n = -1;
      if (!(ls >> name >> n) || n < 0) throw fail("malformed element declaration");
      if (name != "vertex") throw fail("unsupported element '" + name + "'");
      have_vertex = in_vertex = true;
      count = static_cast<std::size_t>(n);
    } else if (word == "property") {
      if (!in_vertex) throw fail("property outside the vertex element");
      std::string type, name;
      if (!(ls >> type >> name) || type == "list") throw fail("unsupported property declaration");
      props.push_back(name);
    } else {
      throw fail("unknown header keyword '" + word + "'");
    }
  }
  if (!ascii) throw fail("missing format line");
  if (!have_vertex) throw fail("missing 'element vertex'");
  auto find = [&](const char* n) -> std::size_t {
    for (std::size_t i = 0; i < props.size(); ++i) {
      if (props[i] == n) return i;
    }
    throw fail(std::string("vertex element lacks property '") + n + "'");
  };
  const std::size_t ix = find("x"), iy = find("y"), iz = find("z");

  PointCloud cloud;
  cloud.points.reserve(count);
  std::vector<double> values(props.size());
  for (std::size_t row = 1; row <= count; ++row) {
    if (!next()) {
      ++lineno;
      throw fail("vertex row " + std::to_string(row) + " of " + std::to_string(count) + " is missing");
    }
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t k = 0; k < props.size(); ++k) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      const auto res = std::from_chars(p, end, values[k]);
      if (res.ec != std::errc()) {
        throw fail("vertex row " + std::to_string(row) + ": expected " + std::to_string(props.size()) + " numbers");
      }
      p = res.ptr;
    }
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p != end) throw fail("vertex row " + std::to_string(row) + ": trailing data");
    cloud.points.push_back({values[ix], values[iy], values[iz]});
  }
  while (next()) {
    if (line.find_first_not_of(" \t") != std::string::npos) {
      throw fail("more vertex rows than the advertised " + std::to_string(count));
    }
  }
  return cloud;
}

void save_ply(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write PLY " + path.string());
  write_ply(out, cloud);
}

PointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open PLY " + path.string());
  return read_ply(in);
}

}  // namespace gpr::cloud
