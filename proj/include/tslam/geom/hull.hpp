#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tslam/geom/mesh.hpp"

namespace ts {

/// Convex hull of a point cloud, outward-wound triangles. Fewer than four
/// non-coplanar points give an empty mesh.
Mesh convex_hull(const std::vector<Eigen::Vector3d>& points);

/// Convex hull with faces of circumradius above 1/alpha removed (alpha <= 0
/// keeps everything). Falls back to the full hull when the filter would
/// delete every face.
Mesh alpha_shape_mesh(const std::vector<Eigen::Vector3d>& points, double alpha);

}  // namespace ts
