#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tslam/geom/mesh.hpp"
#include "tslam/geom/voxel_grid.hpp"

namespace ts {

/// Regular scalar lattice. values is x-fastest: idx = x + nx*(y + ny*z).
/// Node (x,y,z) sits at origin + spacing .* (x,y,z).
struct ScalarField {
  int nx = 0, ny = 0, nz = 0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d spacing = Eigen::Vector3d::Ones();
  std::vector<double> values;

  static ScalarField allocate(int nx, int ny, int nz,
                              const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& spacing);

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(y) +
                static_cast<std::size_t>(ny) * static_cast<std::size_t>(z));
  }
  double at(int x, int y, int z) const { return values[index(x, y, z)]; }
  double& at(int x, int y, int z) { return values[index(x, y, z)]; }
  Eigen::Vector3d node(int x, int y, int z) const {
    return origin + spacing.cwiseProduct(Eigen::Vector3d(x, y, z));
  }
};

/// Isosurface extraction with the standard 256-case table and linear edge
/// interpolation. Vertices shared between cells are welded, so the output is
/// closed wherever the crossing stays away from the lattice boundary.
/// A field that never crosses iso yields an empty mesh.
Mesh marching_cubes(const ScalarField& field, double iso);

/// Occupancy samples at cell centers (occupied = 1, free = 0) with one layer
/// of zero padding on every side, so surfaces touching the box still close.
ScalarField field_from_grid(const VoxelGrid& grid);

/// Axis-aligned cube faces between occupied and free cells (grid boundary
/// counts as free), quads split into two triangles, outward winding.
Mesh grid_to_blocky_mesh(const VoxelGrid& grid);

}  // namespace ts
