#include "tslam/geom/voxelize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ts {

namespace {

struct AxisFrame {
  int a;  // ray axis
  int u;  // row axes
  int v;
};

}  // namespace

VoxelGrid voxelize_solid(const Mesh& mesh, int n,
                         const Eigen::Vector3d& bbox_min,
                         const Eigen::Vector3d& bbox_max,
                         VoxelizeStats* stats) {
  VoxelGrid grid(n, bbox_min, bbox_max);
  const double edge = grid.edge();
  std::vector<std::uint8_t> votes(static_cast<std::size_t>(grid.cell_count()), 0);
  VoxelizeStats local;

  const AxisFrame frames[3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
  const int nf = static_cast<int>(mesh.faces.size());

  for (const AxisFrame& fr : frames) {
    // bin triangles into the (u, v) row raster by projected bounding box
    std::vector<std::vector<int>> bins(static_cast<std::size_t>(n) * n);
    for (int f = 0; f < nf; ++f) {
      const auto& tri = mesh.faces[f];
      double ulo = 1e300, uhi = -1e300, vlo = 1e300, vhi = -1e300;
      for (int k = 0; k < 3; ++k) {
        const auto& p = mesh.vertices[tri[k]];
        ulo = std::min(ulo, p[fr.u]);
        uhi = std::max(uhi, p[fr.u]);
        vlo = std::min(vlo, p[fr.v]);
        vhi = std::max(vhi, p[fr.v]);
      }
      // row centers live at bbox_min + (i + 0.5) * edge
      auto to_row = [&](double w, int axis) {
        return static_cast<int>(
            std::floor((w - bbox_min[axis]) / edge - 0.5));
      };
      const int iu0 = std::max(0, to_row(ulo, fr.u));
      const int iu1 = std::min(n - 1, to_row(uhi, fr.u) + 1);
      const int iv0 = std::max(0, to_row(vlo, fr.v));
      const int iv1 = std::min(n - 1, to_row(vhi, fr.v) + 1);
      for (int iv = iv0; iv <= iv1; ++iv) {
        for (int iu = iu0; iu <= iu1; ++iu) {
          bins[static_cast<std::size_t>(iv) * n + iu].push_back(f);
        }
      }
    }

    std::vector<double> crossings;
    for (int iv = 0; iv < n; ++iv) {
      for (int iu = 0; iu < n; ++iu) {
        const auto& bin = bins[static_cast<std::size_t>(iv) * n + iu];
        if (bin.empty()) continue;
        // rays pass exactly through cell centers, so all three axis rays
        // classify the very same point and their parities can only differ
        // when the mesh itself is inconsistent
        const double u0 = bbox_min[fr.u] + (iu + 0.5) * edge;
        const double v0 = bbox_min[fr.v] + (iv + 0.5) * edge;
        // signed area of the directed projected edge (gi -> gj) against the
        // ray origin, evaluated in a canonical vertex order so the two
        // triangles sharing the edge see bitwise-identical magnitudes
        auto edge_fn = [&](int gi, int gj) {
          const auto& a = mesh.vertices[std::min(gi, gj)];
          const auto& b = mesh.vertices[std::max(gi, gj)];
          const double sc = (a[fr.u] - u0) * (b[fr.v] - v0) -
                            (a[fr.v] - v0) * (b[fr.u] - u0);
          return gi < gj ? sc : -sc;
        };
        crossings.clear();
        for (int f : bin) {
          const auto& tri = mesh.faces[f];
          const auto& p0 = mesh.vertices[tri[0]];
          const auto& p1 = mesh.vertices[tri[1]];
          const auto& p2 = mesh.vertices[tri[2]];
          const double s1 = edge_fn(tri[0], tri[1]);  // weight of p2
          const double s2 = edge_fn(tri[1], tri[2]);  // weight of p0
          const double s3 = edge_fn(tri[2], tri[0]);  // weight of p1
          const double w = s1 + s2 + s3;
          if (w == 0.0) continue;  // projects edge-on
          const double flip = w > 0 ? 1.0 : -1.0;
          // half-open edges: a ray exactly on an edge belongs to exactly
          // one of the adjacent triangles (top-left ownership rule)
          const int order[3][2] = {{tri[0], tri[1]},
                                   {tri[1], tri[2]},
                                   {tri[2], tri[0]}};
          const double areas[3] = {s1, s2, s3};
          bool inside = true;
          for (int k = 0; k < 3 && inside; ++k) {
            const double s = flip * areas[k];
            if (s > 0) continue;
            if (s < 0) {
              inside = false;
              break;
            }
            const auto& pa = mesh.vertices[order[k][0]];
            const auto& pb = mesh.vertices[order[k][1]];
            const double du = flip * (pb[fr.u] - pa[fr.u]);
            const double dv = flip * (pb[fr.v] - pa[fr.v]);
            inside = dv > 0 || (dv == 0 && du < 0);
          }
          if (!inside) continue;
          const double t = (flip * s2 * p0[fr.a] + flip * s3 * p1[fr.a] +
                            flip * s1 * p2[fr.a]) /
                           (flip * w);
          crossings.push_back(t);
        }
        if (crossings.empty()) continue;
        std::sort(crossings.begin(), crossings.end());
        if (crossings.size() % 2 != 0) ++local.odd_rays[fr.a];
        // walk cells along the ray axis; parity of crossings above center
        std::size_t ci = 0;
        std::size_t remaining = crossings.size();
        for (int ia = 0; ia < n; ++ia) {
          const double ca = bbox_min[fr.a] + (ia + 0.5) * edge;
          while (ci < crossings.size() && crossings[ci] <= ca) {
            ++ci;
            --remaining;
          }
          if (remaining % 2 == 1) {
            int xyz[3];
            xyz[fr.a] = ia;
            xyz[fr.u] = iu;
            xyz[fr.v] = iv;
            ++votes[static_cast<std::size_t>(
                grid.index(xyz[0], xyz[1], xyz[2]))];
          }
        }
      }
    }
  }

  for (std::int64_t i = 0; i < grid.cell_count(); ++i) {
    const std::uint8_t v = votes[static_cast<std::size_t>(i)];
    if (v >= 2) grid.set(i, true);
    if (v == 1 || v == 2) ++local.ambiguous;
  }
  if (stats) *stats = local;
  return grid;
}

VoxelGrid voxelize_workspace(const Mesh& mesh, int n, VoxelizeStats* stats) {
  return voxelize_solid(mesh, n, Eigen::Vector3d(-0.5, -0.5, -0.5),
                        Eigen::Vector3d(0.5, 0.5, 0.5), stats);
}

}  // namespace ts
