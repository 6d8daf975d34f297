#include "fracgm/ply.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fracgm/error.hpp"

namespace fracgm {

namespace {

struct Element {
  std::string name;
  long count = 0;
  std::vector<std::string> properties;
  bool has_list = false;
};

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  raise(ErrorCode::kIo, path.string() + ": " + what);
}

}  // namespace

Eigen::Matrix3Xd read_ply_vertices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");

  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) fail(path, "missing ply magic");

  std::vector<Element> elements;
  bool ascii = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tok(line);
    std::string key;
    tok >> key;
    if (key == "format") {
      std::string fmt;
      tok >> fmt;
      ascii = fmt == "ascii";
    } else if (key == "element") {
      Element e;
      tok >> e.name >> e.count;
      if (!tok || e.count < 0) fail(path, "bad element line: " + line);
      elements.push_back(e);
    } else if (key == "property") {
      if (elements.empty()) fail(path, "property before element");
      std::string type;
      tok >> type;
      if (type == "list") {
        elements.back().has_list = true;
        std::string count_type, item_type;
        tok >> count_type >> item_type;
      }
      std::string name;
      tok >> name;
      elements.back().properties.push_back(name);
    } else if (key == "end_header") {
      break;
    }
  }
  if (!in) fail(path, "truncated header");
  if (!ascii) fail(path, "only ASCII PLY is supported");

  Eigen::Matrix3Xd points;
  bool found = false;
  for (const auto& e : elements) {
    if (e.name != "vertex") {
      // Skip the body lines of elements we do not read.
      for (long i = 0; i < e.count; ++i) {
        if (!std::getline(in, line)) fail(path, "truncated body in element " + e.name);
      }
      continue;
    }
    int ix = -1, iy = -1, iz = -1;
    for (int p = 0; p < static_cast<int>(e.properties.size()); ++p) {
      if (e.properties[p] == "x") ix = p;
      if (e.properties[p] == "y") iy = p;
      if (e.properties[p] == "z") iz = p;
    }
    if (ix < 0 || iy < 0 || iz < 0) fail(path, "vertex element lacks x/y/z");
    if (e.has_list) fail(path, "list properties on vertices are not supported");

    points.resize(3, e.count);
    std::vector<double> row(e.properties.size());
    for (long i = 0; i < e.count; ++i) {
      if (!std::getline(in, line)) fail(path, "truncated vertex list");
      std::istringstream tok(line);
      for (auto& v : row) {
        if (!(tok >> v)) fail(path, "malformed vertex line " + std::to_string(i));
      }
      points.col(i) << row[ix], row[iy], row[iz];
    }
    found = true;
    break;
  }
  if (!found) fail(path, "no vertex element");
  return points;
}

}  // namespace fracgm
