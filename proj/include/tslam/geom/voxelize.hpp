#pragma once

#include <array>
#include <cstdint>

#include "tslam/geom/mesh.hpp"
#include "tslam/geom/voxel_grid.hpp"

namespace ts {

struct VoxelizeStats {
  /// Voxels where the three axis parities were not unanimous.
  std::int64_t ambiguous = 0;
  /// Rays with an odd total crossing count per axis (watertightness probe).
  std::array<std::int64_t, 3> odd_rays{};

  bool watertight() const {
    return ambiguous == 0 && odd_rays[0] == 0 && odd_rays[1] == 0 &&
           odd_rays[2] == 0;
  }
};

/// Solid voxelization: a cell is occupied iff its center is inside the
/// mesh, decided by parity of axis-aligned ray crossings with majority
/// vote over the three axes. Deterministic; never throws on imperfect
/// meshes (disagreements are reported through stats).
VoxelGrid voxelize_solid(const Mesh& mesh, int n,
                         const Eigen::Vector3d& bbox_min,
                         const Eigen::Vector3d& bbox_max,
                         VoxelizeStats* stats = nullptr);

/// voxelize_solid over the unit workspace cube [-0.5, 0.5]^3.
VoxelGrid voxelize_workspace(const Mesh& mesh, int n,
                             VoxelizeStats* stats = nullptr);

}  // namespace ts
