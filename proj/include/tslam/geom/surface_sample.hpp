#pragma once

#include <vector>

#include "tslam/geom/mesh.hpp"
#include "tslam/util/rng.hpp"

namespace ts {

struct SurfaceSample {
  Eigen::Vector3d point;
  Eigen::Vector3d normal;  // unit, from the source face
  int face = -1;
};

/// Area-uniform surface samples: faces chosen proportional to area,
/// barycentric-uniform within each face. Reproducible for a fixed seed.
std::vector<SurfaceSample> sample_surface(const Mesh& mesh, int count,
                                          std::uint64_t seed);

std::vector<Eigen::Vector3d> sample_points(const Mesh& mesh, int count,
                                           std::uint64_t seed);

}  // namespace ts
