#include "tslam/geom/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ts {

namespace {

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
  throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

// edge -> incident face count; an edge used more than twice means the
// surface is not manifold there
bool looks_non_manifold(const Mesh& mesh) {
  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& tri : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      int a = tri[e], b = tri[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      if (++edge_use[{a, b}] > 2) return true;
    }
  }
  return false;
}

void check_indices(Mesh& mesh, const std::string& name, int line) {
  const int nv = static_cast<int>(mesh.vertices.size());
  for (const auto& tri : mesh.faces) {
    for (int idx : tri) {
      if (idx < 0 || idx >= nv) {
        fail(name, line, "face index " + std::to_string(idx) +
                             " out of range (have " + std::to_string(nv) +
                             " vertices)");
      }
    }
  }
}

void finish(Mesh& mesh, const std::string& name, int line) {
  check_indices(mesh, name, line);
  mesh.remove_degenerate_faces();
  if (mesh.vertices.empty() || mesh.empty()) {
    fail(name, line, "empty mesh (no usable faces)");
  }
  mesh.non_manifold_warning = looks_non_manifold(mesh);
}

void fan_triangulate(Mesh& mesh, const std::vector<int>& poly) {
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    mesh.faces.push_back({poly[0], poly[static_cast<int>(i)],
                          poly[static_cast<int>(i) + 1]});
  }
}

}  // namespace

Mesh parse_off(std::istream& is, const std::string& name) {
  Mesh mesh;
  std::string token;
  int line = 1;
  auto next_token = [&](const char* expect) {
    while (is >> token) {
      if (token[0] == '#') {
        std::string rest;
        std::getline(is, rest);
        ++line;
        continue;
      }
      return;
    }
    fail(name, line, std::string("unexpected end of file, expected ") + expect);
  };
  next_token("OFF header");
  if (token != "OFF") fail(name, line, "missing OFF header");
  next_token("vertex count");
  long nv = 0, nf = 0, ne = 0;
  try {
    nv = std::stol(token);
    next_token("face count");
    nf = std::stol(token);
    next_token("edge count");
    ne = std::stol(token);
  } catch (const std::exception&) {
    fail(name, line, "bad counts in header");
  }
  (void)ne;
  if (nv <= 0 || nf < 0) fail(name, line, "bad counts in header");
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    double x, y, z;
    if (!(is >> x >> y >> z)) fail(name, line, "bad vertex record");
    mesh.vertices.emplace_back(x, y, z);
  }
  for (long f = 0; f < nf; ++f) {
    int arity;
    if (!(is >> arity) || arity < 3) fail(name, line, "bad face record");
    std::vector<int> poly(arity);
    for (int& idx : poly) {
      if (!(is >> idx)) fail(name, line, "bad face record");
    }
    fan_triangulate(mesh, poly);
  }
  finish(mesh, name, line);
  return mesh;
}

Mesh parse_obj(std::istream& is, const std::string& name) {
  Mesh mesh;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::istringstream ls(raw);
    std::string kind;
    if (!(ls >> kind) || kind[0] == '#') continue;
    if (kind == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail(name, line, "bad vertex record");
      mesh.vertices.emplace_back(x, y, z);
    } else if (kind == "f") {
      std::vector<int> poly;
      std::string ref;
      while (ls >> ref) {
        // "i", "i/t", "i//n", "i/t/n"; negative = relative to current count
        const std::size_t slash = ref.find('/');
        const std::string head = ref.substr(0, slash);
        int idx = 0;
        try {
          idx = std::stoi(head);
        } catch (const std::exception&) {
          fail(name, line, "bad face index '" + ref + "'");
        }
        if (idx < 0) idx = static_cast<int>(mesh.vertices.size()) + idx + 1;
        poly.push_back(idx - 1);  // OBJ is 1-based
      }
      if (poly.size() < 3) fail(name, line, "face with fewer than 3 vertices");
      fan_triangulate(mesh, poly);
    }
    // all other record kinds (vn, vt, o, g, s, usemtl, ...) are ignored
  }
  finish(mesh, name, line);
  return mesh;
}

Mesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::string ext;
  const auto dot = path.find_last_of('.');
  if (dot != std::string::npos) {
    ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
  }
  if (ext == "off") return parse_off(is, path);
  if (ext == "obj") return parse_obj(is, path);
  // sniff: OFF files start with the literal header
  std::string head;
  is >> head;
  is.seekg(0);
  if (head == "OFF") return parse_off(is, path);
  return parse_obj(is, path);
}

void save_obj(const Mesh& mesh, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.precision(9);
  for (const auto& v : mesh.vertices) {
    os << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  }
  for (const auto& f : mesh.faces) {
    os << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace ts
