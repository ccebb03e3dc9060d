#include "tslam/geom/hull.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace ts {

namespace {

struct HullFace {
  std::array<int, 3> v;
  Eigen::Vector3d n = Eigen::Vector3d::Zero();  // outward unit normal
  double d = 0.0;                               // plane offset, n.x = d
  bool alive = true;
};

HullFace make_face(const std::vector<Eigen::Vector3d>& pts, int a, int b, int c,
                   const Eigen::Vector3d& inside) {
  HullFace f;
  f.v = {a, b, c};
  Eigen::Vector3d n = (pts[static_cast<std::size_t>(b)] - pts[static_cast<std::size_t>(a)])
                          .cross(pts[static_cast<std::size_t>(c)] -
                                 pts[static_cast<std::size_t>(a)]);
  if (n.dot(inside - pts[static_cast<std::size_t>(a)]) > 0) {
    std::swap(f.v[1], f.v[2]);
    n = -n;
  }
  f.n = n.normalized();
  f.d = f.n.dot(pts[static_cast<std::size_t>(f.v[0])]);
  return f;
}

Mesh compact(const std::vector<Eigen::Vector3d>& pts, const std::vector<HullFace>& faces) {
  Mesh out;
  std::map<int, int> remap;
  for (const HullFace& f : faces) {
    if (!f.alive) continue;
    std::array<int, 3> tri{};
    for (int i = 0; i < 3; ++i) {
      auto [it, fresh] = remap.try_emplace(f.v[static_cast<std::size_t>(i)],
                                           static_cast<int>(out.vertices.size()));
      if (fresh) out.vertices.push_back(pts[static_cast<std::size_t>(f.v[static_cast<std::size_t>(i)])]);
      tri[static_cast<std::size_t>(i)] = it->second;
    }
    out.faces.push_back(tri);
  }
  return out;
}

double circumradius(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                    const Eigen::Vector3d& c) {
  const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
  const double area2 = (b - a).cross(c - a).norm();  // twice the area
  if (area2 <= 0.0) return std::numeric_limits<double>::infinity();
  return la * lb * lc / (2.0 * area2);
}

}  // namespace

Mesh convex_hull(const std::vector<Eigen::Vector3d>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 4) return {};

  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-9 * std::max(1.0, scale);

  // Initial simplex: a point, the farthest point from it, the farthest from
  // their line, the farthest from their plane.
  int i0 = 0;
  for (int i = 1; i < n; ++i)
    if (std::lexicographical_compare(points[static_cast<std::size_t>(i)].data(),
                                     points[static_cast<std::size_t>(i)].data() + 3,
                                     points[static_cast<std::size_t>(i0)].data(),
                                     points[static_cast<std::size_t>(i0)].data() + 3))
      i0 = i;
  int i1 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    const double d = (points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(i0)]).norm();
    if (d > best) { best = d; i1 = i; }
  }
  if (i1 < 0) return {};
  const Eigen::Vector3d dir =
      (points[static_cast<std::size_t>(i1)] - points[static_cast<std::size_t>(i0)]).normalized();
  int i2 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d r = points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(i0)];
    const double d = (r - r.dot(dir) * dir).norm();
    if (d > best) { best = d; i2 = i; }
  }
  if (i2 < 0) return {};
  const Eigen::Vector3d nrm =
      (points[static_cast<std::size_t>(i1)] - points[static_cast<std::size_t>(i0)])
          .cross(points[static_cast<std::size_t>(i2)] - points[static_cast<std::size_t>(i0)])
          .normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(nrm.dot(points[static_cast<std::size_t>(i)] -
                                      points[static_cast<std::size_t>(i0)]));
    if (d > best) { best = d; i3 = i; }
  }
  if (i3 < 0) return {};

  const Eigen::Vector3d inside =
      0.25 * (points[static_cast<std::size_t>(i0)] + points[static_cast<std::size_t>(i1)] +
              points[static_cast<std::size_t>(i2)] + points[static_cast<std::size_t>(i3)]);
  std::vector<HullFace> faces;
  faces.push_back(make_face(points, i0, i1, i2, inside));
  faces.push_back(make_face(points, i0, i1, i3, inside));
  faces.push_back(make_face(points, i0, i2, i3, inside));
  faces.push_back(make_face(points, i1, i2, i3, inside));

  for (int p = 0; p < n; ++p) {
    if (p == i0 || p == i1 || p == i2 || p == i3) continue;
    const Eigen::Vector3d& q = points[static_cast<std::size_t>(p)];
    std::vector<int> visible;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f)
      if (faces[static_cast<std::size_t>(f)].alive &&
          faces[static_cast<std::size_t>(f)].n.dot(q) - faces[static_cast<std::size_t>(f)].d > eps)
        visible.push_back(f);
    if (visible.empty()) continue;

    // Horizon: directed edges of visible faces whose reverse edge is not.
    std::map<std::pair<int, int>, int> edge_count;
    for (int f : visible)
      for (int e = 0; e < 3; ++e) {
        const int a = faces[static_cast<std::size_t>(f)].v[static_cast<std::size_t>(e)];
        const int b = faces[static_cast<std::size_t>(f)].v[static_cast<std::size_t>((e + 1) % 3)];
        ++edge_count[{a, b}];
      }
    for (int f : visible) faces[static_cast<std::size_t>(f)].alive = false;
    for (const auto& [edge, cnt] : edge_count) {
      (void)cnt;
      if (edge_count.count({edge.second, edge.first})) continue;  // interior edge
      faces.push_back(make_face(points, edge.first, edge.second, p, inside));
    }
  }
  return compact(points, faces);
}

Mesh alpha_shape_mesh(const std::vector<Eigen::Vector3d>& points, double alpha) {
  Mesh hull = convex_hull(points);
  if (alpha <= 0.0 || hull.empty()) return hull;
  const double limit = 1.0 / alpha;
  Mesh filtered;
  filtered.vertices = hull.vertices;
  for (const auto& f : hull.faces)
    if (circumradius(hull.vertices[static_cast<std::size_t>(f[0])],
                     hull.vertices[static_cast<std::size_t>(f[1])],
                     hull.vertices[static_cast<std::size_t>(f[2])]) <= limit)
      filtered.faces.push_back(f);
  if (filtered.faces.empty()) return hull;
  return filtered;
}

}  // namespace ts
