#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace ts {

/// Triangle mesh in world units. Face normals and areas are derived from
/// the vertex data on demand and cached by value.
struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
  // set by loaders when the input looked non-manifold; informational only
  bool non_manifold_warning = false;

  bool empty() const { return faces.empty(); }

  Eigen::Vector3d face_normal(int f) const;
  double face_area(int f) const;

  void bounding_box(Eigen::Vector3d& lo, Eigen::Vector3d& hi) const;
  double total_area() const;

  /// Drops faces with (near) zero area and out-of-range duplicate index
  /// triples. Loaders call this; invariant afterwards: no degenerate face.
  void remove_degenerate_faces(double area_eps = 1e-14);

  void transform(const Eigen::Matrix3d& rot, const Eigen::Vector3d& trans);
};

/// Centers the mesh bounding box at the origin and scales it uniformly so
/// the bounding-box volume is 1/workspace_scale of the unit workspace cube
/// [-0.5, 0.5]^3. Throws on degenerate (zero-extent) meshes.
Mesh normalize_to_workspace(const Mesh& mesh, double workspace_scale);

/// Mesh rotated by yaw (radians) about the vertical (z) axis through origin.
Mesh rotate_yaw(const Mesh& mesh, double yaw);

/// Yaw by pose_id * 2*pi/pose_count. Quarter-turn multiples use an exact
/// {0, +-1} rotation matrix so lattice-aligned geometry stays lattice-aligned.
Mesh rotate_yaw_pose(const Mesh& mesh, int pose_id, int pose_count);

}  // namespace ts
