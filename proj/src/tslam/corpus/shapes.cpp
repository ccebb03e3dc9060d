#include "tslam/corpus/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tslam/geom/voxelize.hpp"
#include "tslam/util/rng.hpp"

namespace ts {

namespace {

constexpr int kRevolveSegments = 96;
constexpr int kTorusRingSegments = 96;
constexpr int kTorusTubeSegments = 48;

double get_param(const ShapeRecipe& r, const std::string& key) {
  auto it = r.params.find(key);
  if (it == r.params.end()) {
    throw std::invalid_argument("shape recipe missing parameter '" + key +
                                "' for family " + to_string(r.family));
  }
  return it->second;
}

double get_param_or(const ShapeRecipe& r, const std::string& key,
                    double fallback) {
  auto it = r.params.find(key);
  return it == r.params.end() ? fallback : it->second;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("shape recipe: " + what);
}

// Surface of revolution about the z axis. The profile is an ordered loop of
// (radius, z) points; the loop closes implicitly. Edges with both endpoints
// on the axis emit nothing, endpoints on the axis become fan apexes.
// Winding follows the profile order: traverse the solid's boundary so the
// material stays on the left in the (r, z) plane for outward normals.
Mesh revolve_profile(const std::vector<std::pair<double, double>>& profile,
                     int segments) {
  Mesh m;
  const int np = static_cast<int>(profile.size());
  std::vector<int> ring_start(profile.size(), -1);
  for (int i = 0; i < np; ++i) {
    const auto [r, z] = profile[i];
    ring_start[i] = static_cast<int>(m.vertices.size());
    if (r <= 0.0) {
      m.vertices.push_back({0.0, 0.0, z});
    } else {
      for (int s = 0; s < segments; ++s) {
        const double a = 2.0 * M_PI * s / segments;
        m.vertices.push_back({r * std::cos(a), r * std::sin(a), z});
      }
    }
  }
  auto ring_vertex = [&](int point, int s) {
    return profile[point].first <= 0.0
               ? ring_start[point]
               : ring_start[point] + (s % segments);
  };
  for (int i = 0; i < np; ++i) {
    const int j = (i + 1) % np;
    const bool a_axis = profile[i].first <= 0.0;
    const bool b_axis = profile[j].first <= 0.0;
    if (a_axis && b_axis) continue;
    for (int s = 0; s < segments; ++s) {
      const int a0 = ring_vertex(i, s), a1 = ring_vertex(i, s + 1);
      const int b0 = ring_vertex(j, s), b1 = ring_vertex(j, s + 1);
      if (a_axis) {
        m.faces.push_back({a0, b1, b0});
      } else if (b_axis) {
        m.faces.push_back({a0, a1, b0});
      } else {
        m.faces.push_back({a0, a1, b1});
        m.faces.push_back({a0, b1, b0});
      }
    }
  }
  return m;
}

Mesh make_torus(double major, double minor, int ring_segments,
                int tube_segments) {
  Mesh m;
  for (int u = 0; u < ring_segments; ++u) {
    const double t = 2.0 * M_PI * u / ring_segments;
    for (int v = 0; v < tube_segments; ++v) {
      const double p = 2.0 * M_PI * v / tube_segments;
      const double ring = major + minor * std::cos(p);
      m.vertices.push_back(
          {ring * std::cos(t), ring * std::sin(t), minor * std::sin(p)});
    }
  }
  auto vid = [&](int u, int v) {
    return (u % ring_segments) * tube_segments + (v % tube_segments);
  };
  for (int u = 0; u < ring_segments; ++u) {
    for (int v = 0; v < tube_segments; ++v) {
      const int v00 = vid(u, v), v10 = vid(u + 1, v);
      const int v11 = vid(u + 1, v + 1), v01 = vid(u, v + 1);
      m.faces.push_back({v00, v10, v11});
      m.faces.push_back({v00, v11, v01});
    }
  }
  return m;
}

struct AlignedBox {
  Eigen::Vector3d lo, hi;
  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() > lo.array()).all() && (p.array() < hi.array()).all();
  }
};

// Exact boolean of axis-aligned boxes: cut space into the rectilinear cell
// complex induced by all box faces, classify cell centers, and emit the
// boundary quads. Watertight by construction.
Mesh mesh_rectilinear(const std::vector<AlignedBox>& add,
                      const std::vector<AlignedBox>& sub) {
  std::array<std::vector<double>, 3> cuts;
  for (int a = 0; a < 3; ++a) {
    for (const auto& b : add) {
      cuts[a].push_back(b.lo[a]);
      cuts[a].push_back(b.hi[a]);
    }
    for (const auto& b : sub) {
      cuts[a].push_back(b.lo[a]);
      cuts[a].push_back(b.hi[a]);
    }
    std::sort(cuts[a].begin(), cuts[a].end());
    cuts[a].erase(std::unique(cuts[a].begin(), cuts[a].end()), cuts[a].end());
  }
  const int nx = static_cast<int>(cuts[0].size()) - 1;
  const int ny = static_cast<int>(cuts[1].size()) - 1;
  const int nz = static_cast<int>(cuts[2].size()) - 1;
  auto inside = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz) return false;
    const Eigen::Vector3d c(0.5 * (cuts[0][x] + cuts[0][x + 1]),
                            0.5 * (cuts[1][y] + cuts[1][y + 1]),
                            0.5 * (cuts[2][z] + cuts[2][z + 1]));
    bool in = false;
    for (const auto& b : add) in = in || b.contains(c);
    if (!in) return false;
    for (const auto& b : sub)
      if (b.contains(c)) return false;
    return true;
  };

  static constexpr int kFaceCorner[6][4][3] = {
      {{1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {1, 0, 1}},
      {{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {0, 1, 0}},
      {{0, 1, 0}, {0, 1, 1}, {1, 1, 1}, {1, 1, 0}},
      {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1}},
      {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}},
      {{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 0, 0}}};
  static constexpr int kNeighbor[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                          {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
  Mesh m;
  std::map<std::array<int, 3>, int> corner_vertex;
  auto corner = [&](int x, int y, int z) {
    const std::array<int, 3> key{x, y, z};
    if (auto it = corner_vertex.find(key); it != corner_vertex.end())
      return it->second;
    const int idx = static_cast<int>(m.vertices.size());
    m.vertices.push_back({cuts[0][x], cuts[1][y], cuts[2][z]});
    corner_vertex.emplace(key, idx);
    return idx;
  };
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        if (!inside(x, y, z)) continue;
        for (int face = 0; face < 6; ++face) {
          if (inside(x + kNeighbor[face][0], y + kNeighbor[face][1],
                     z + kNeighbor[face][2])) {
            continue;
          }
          int q[4];
          for (int i = 0; i < 4; ++i) {
            q[i] = corner(x + kFaceCorner[face][i][0],
                          y + kFaceCorner[face][i][1],
                          z + kFaceCorner[face][i][2]);
          }
          m.faces.push_back({q[0], q[1], q[2]});
          m.faces.push_back({q[0], q[2], q[3]});
        }
      }
    }
  }
  return m;
}

AlignedBox box_from_params(const ShapeRecipe& r, const std::string& prefix) {
  const Eigen::Vector3d c(get_param(r, prefix + "cx"),
                          get_param(r, prefix + "cy"),
                          get_param(r, prefix + "cz"));
  const Eigen::Vector3d h(get_param(r, prefix + "hx"),
                          get_param(r, prefix + "hy"),
                          get_param(r, prefix + "hz"));
  require((h.array() > 0).all(), "box half-extents must be positive");
  return {c - h, c + h};
}

Mesh build_mesh(const ShapeRecipe& r, int n) {
  switch (r.family) {
    case ShapeFamily::box: {
      const Eigen::Vector3d h(0.5 * get_param(r, "lx"),
                              0.5 * get_param(r, "ly"),
                              0.5 * get_param(r, "lz"));
      require((h.array() > 0).all(), "box extents must be positive");
      return mesh_rectilinear({{-h, h}}, {});
    }
    case ShapeFamily::sphere: {
      const double radius = get_param(r, "radius");
      require(radius > 0, "sphere radius must be positive");
      return make_icosphere(radius, 4);
    }
    case ShapeFamily::cylinder: {
      const double radius = get_param(r, "radius");
      const double height = get_param(r, "height");
      require(radius > 0 && height > 0, "cylinder needs positive size");
      return revolve_profile({{0.0, -height / 2},
                              {radius, -height / 2},
                              {radius, height / 2},
                              {0.0, height / 2}},
                             kRevolveSegments);
    }
    case ShapeFamily::torus: {
      const double major = get_param(r, "major");
      const double minor = get_param(r, "minor");
      require(major > 0 && minor > 0 && minor < major,
              "torus needs 0 < minor < major");
      return make_torus(major, minor, kTorusRingSegments, kTorusTubeSegments);
    }
    case ShapeFamily::cup: {
      const double outer = get_param(r, "outer_radius");
      const double height = get_param(r, "height");
      const double wall = get_param_or(r, "wall", 3.0 / n);
      require(outer > 0 && height > 0 && wall > 0, "cup needs positive size");
      require(outer - wall > 0.01, "cup wall leaves no cavity");
      require(height - wall > 0.01, "cup too shallow for its wall");
      const double z0 = -height / 2, z1 = height / 2;
      return revolve_profile({{0.0, z0},
                              {outer, z0},
                              {outer, z1},
                              {outer - wall, z1},
                              {outer - wall, z0 + wall},
                              {0.0, z0 + wall}},
                             kRevolveSegments);
    }
    case ShapeFamily::composite_union:
    case ShapeFamily::composite_difference: {
      const int adds = static_cast<int>(get_param(r, "n_add"));
      const int subs = static_cast<int>(get_param_or(r, "n_sub", 0));
      require(adds >= 1 && adds <= 6, "need 1..6 added boxes");
      require(subs >= 0 && subs <= 6, "need 0..6 subtracted boxes");
      std::vector<AlignedBox> add, sub;
      for (int i = 0; i < adds; ++i)
        add.push_back(box_from_params(r, "add" + std::to_string(i) + "_"));
      for (int i = 0; i < subs; ++i)
        sub.push_back(box_from_params(r, "sub" + std::to_string(i) + "_"));
      if (r.family == ShapeFamily::composite_difference)
        require(subs >= 1, "difference needs a subtracted box");
      return mesh_rectilinear(add, sub);
    }
  }
  throw std::invalid_argument("unknown shape family");
}

void put_box(std::map<std::string, double>& params, const std::string& prefix,
             const Eigen::Vector3d& c, const Eigen::Vector3d& h) {
  params[prefix + "cx"] = c.x();
  params[prefix + "cy"] = c.y();
  params[prefix + "cz"] = c.z();
  params[prefix + "hx"] = h.x();
  params[prefix + "hy"] = h.y();
  params[prefix + "hz"] = h.z();
}

}  // namespace

std::string to_string(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::box: return "box";
    case ShapeFamily::sphere: return "sphere";
    case ShapeFamily::cylinder: return "cylinder";
    case ShapeFamily::torus: return "torus";
    case ShapeFamily::cup: return "cup";
    case ShapeFamily::composite_union: return "composite-union";
    case ShapeFamily::composite_difference: return "composite-difference";
  }
  return "unknown";
}

ShapeFamily family_from_string(const std::string& name) {
  for (ShapeFamily f :
       {ShapeFamily::box, ShapeFamily::sphere, ShapeFamily::cylinder,
        ShapeFamily::torus, ShapeFamily::cup, ShapeFamily::composite_union,
        ShapeFamily::composite_difference}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown shape family '" + name + "'");
}

Mesh make_icosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {{-1, t, 0},  {1, t, 0},  {-1, -t, 0},
                                    {1, -t, 0},  {0, -1, t}, {0, 1, t},
                                    {0, -1, -t}, {0, 1, -t}, {t, 0, -1},
                                    {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      if (auto it = mid.find(key); it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(f.size() * 4);
    for (const auto& tr : f) {
      const int ab = midpoint(tr[0], tr[1]);
      const int bc = midpoint(tr[1], tr[2]);
      const int ca = midpoint(tr[2], tr[0]);
      nf.push_back({tr[0], ab, ca});
      nf.push_back({tr[1], bc, ab});
      nf.push_back({tr[2], ca, bc});
      nf.push_back({ab, bc, ca});
    }
    f = std::move(nf);
  }
  Mesh m;
  m.vertices.reserve(v.size());
  for (const auto& p : v) m.vertices.push_back(radius * p);
  m.faces = std::move(f);
  return m;
}

ShapeRecipe sample_recipe(ShapeFamily family, std::uint64_t seed) {
  Rng rng(seed);
  ShapeRecipe r;
  r.family = family;
  r.seed = seed;
  switch (family) {
    case ShapeFamily::box:
      r.params["lx"] = rng.uniform(0.3, 0.7);
      r.params["ly"] = rng.uniform(0.3, 0.7);
      r.params["lz"] = rng.uniform(0.3, 0.7);
      break;
    case ShapeFamily::sphere:
      r.params["radius"] = rng.uniform(0.2, 0.42);
      break;
    case ShapeFamily::cylinder:
      r.params["radius"] = rng.uniform(0.15, 0.32);
      r.params["height"] = rng.uniform(0.35, 0.8);
      break;
    case ShapeFamily::torus: {
      const double major = rng.uniform(0.24, 0.36);
      // keep the hole at least ~3 cells wide and the tube inside the box
      const double minor =
          rng.uniform(0.06, std::min(0.13, std::min(major - 0.11, 0.47 - major)));
      r.params["major"] = major;
      r.params["minor"] = minor;
      break;
    }
    case ShapeFamily::cup:
      r.params["outer_radius"] = rng.uniform(0.18, 0.34);
      r.params["height"] = rng.uniform(0.4, 0.8);
      break;
    case ShapeFamily::composite_union: {
      const int extra = 1 + static_cast<int>(rng.uniform_index(3));
      r.params["n_add"] = 1 + extra;
      const Eigen::Vector3d base_h(rng.uniform(0.12, 0.26),
                                   rng.uniform(0.12, 0.26),
                                   rng.uniform(0.12, 0.26));
      put_box(r.params, "add0_", Eigen::Vector3d::Zero(), base_h);
      for (int i = 1; i <= extra; ++i) {
        // center inside the base box guarantees the union stays connected
        Eigen::Vector3d c(rng.uniform(-base_h.x(), base_h.x()),
                          rng.uniform(-base_h.y(), base_h.y()),
                          rng.uniform(-base_h.z(), base_h.z()));
        Eigen::Vector3d h(rng.uniform(0.06, 0.2), rng.uniform(0.06, 0.2),
                          rng.uniform(0.06, 0.2));
        for (int a = 0; a < 3; ++a) {
          const double over = std::abs(c[a]) + h[a] - 0.44;
          if (over > 0) h[a] = std::max(0.03, h[a] - over);
        }
        put_box(r.params, "add" + std::to_string(i) + "_", c, h);
      }
      break;
    }
    case ShapeFamily::composite_difference: {
      const Eigen::Vector3d base_h(rng.uniform(0.2, 0.32),
                                   rng.uniform(0.2, 0.32),
                                   rng.uniform(0.2, 0.32));
      r.params["n_add"] = 1;
      put_box(r.params, "add0_", Eigen::Vector3d::Zero(), base_h);
      r.params["n_sub"] = 1;
      // through-hole along a random axis
      const int axis = static_cast<int>(rng.uniform_index(3));
      Eigen::Vector3d c = Eigen::Vector3d::Zero();
      Eigen::Vector3d h;
      for (int a = 0; a < 3; ++a) {
        if (a == axis) {
          h[a] = base_h[a] + 0.02;
        } else {
          h[a] = rng.uniform(0.3, 0.5) * base_h[a];
          c[a] = rng.uniform(-0.2, 0.2) * base_h[a];
        }
      }
      put_box(r.params, "sub0_", c, h);
      break;
    }
  }
  return r;
}

GeneratedShape generate_shape(const ShapeRecipe& recipe, int n) {
  if (n < 4) throw std::invalid_argument("grid resolution too small");
  GeneratedShape out;
  out.mesh = build_mesh(recipe, n);

  Eigen::Vector3d lo, hi;
  out.mesh.bounding_box(lo, hi);
  if ((lo.array() < -0.5).any() || (hi.array() > 0.5).any()) {
    throw std::invalid_argument("shape recipe: mesh exceeds the workspace");
  }

  VoxelizeStats stats;
  out.grid = voxelize_workspace(out.mesh, n, &stats);
  if (!stats.watertight()) {
    throw std::runtime_error("generated mesh voxelized with ambiguities");
  }
  if (out.grid.count_occupied() == 0) {
    throw std::runtime_error("generated shape is empty at resolution " +
                             std::to_string(n));
  }
  return out;
}

}  // namespace ts
