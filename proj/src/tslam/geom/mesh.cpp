#include "tslam/geom/mesh.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ts {

Eigen::Vector3d Mesh::face_normal(int f) const {
  const auto& tri = faces[f];
  const Eigen::Vector3d e1 = vertices[tri[1]] - vertices[tri[0]];
  const Eigen::Vector3d e2 = vertices[tri[2]] - vertices[tri[0]];
  Eigen::Vector3d n = e1.cross(e2);
  const double len = n.norm();
  if (len < 1e-300) return Eigen::Vector3d::UnitZ();
  return n / len;
}

double Mesh::face_area(int f) const {
  const auto& tri = faces[f];
  const Eigen::Vector3d e1 = vertices[tri[1]] - vertices[tri[0]];
  const Eigen::Vector3d e2 = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * e1.cross(e2).norm();
}

void Mesh::bounding_box(Eigen::Vector3d& lo, Eigen::Vector3d& hi) const {
  lo.setConstant(std::numeric_limits<double>::infinity());
  hi.setConstant(-std::numeric_limits<double>::infinity());
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) a += face_area(f);
  return a;
}

void Mesh::remove_degenerate_faces(double area_eps) {
  std::vector<std::array<int, 3>> kept;
  kept.reserve(faces.size());
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const auto& tri = faces[f];
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;
    if (face_area(f) <= area_eps) continue;
    kept.push_back(tri);
  }
  faces = std::move(kept);
}

void Mesh::transform(const Eigen::Matrix3d& rot, const Eigen::Vector3d& trans) {
  for (auto& v : vertices) v = rot * v + trans;
}

Mesh normalize_to_workspace(const Mesh& mesh, double workspace_scale) {
  if (mesh.vertices.empty() || mesh.empty()) {
    throw std::invalid_argument("normalize_to_workspace: empty mesh");
  }
  if (workspace_scale < 1.0) {
    throw std::invalid_argument("normalize_to_workspace: scale must be >= 1");
  }
  Eigen::Vector3d lo, hi;
  mesh.bounding_box(lo, hi);
  const Eigen::Vector3d extent = hi - lo;
  const double vol = extent.x() * extent.y() * extent.z();
  if (!(vol > 0.0)) {
    throw std::invalid_argument(
        "normalize_to_workspace: degenerate (zero-extent) mesh");
  }
  const double factor = std::cbrt(1.0 / (workspace_scale * vol));
  const Eigen::Vector3d center = 0.5 * (lo + hi);
  Mesh out = mesh;
  for (auto& v : out.vertices) v = (v - center) * factor;
  return out;
}

Mesh rotate_yaw(const Mesh& mesh, double yaw) {
  Mesh out = mesh;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix3d rot;
  rot << c, -s, 0, s, c, 0, 0, 0, 1;
  out.transform(rot, Eigen::Vector3d::Zero());
  return out;
}

Mesh rotate_yaw_pose(const Mesh& mesh, int pose_id, int pose_count) {
  if (pose_count <= 0 || pose_id < 0 || pose_id >= pose_count)
    throw std::invalid_argument("rotate_yaw_pose: pose_id out of range");
  if ((4LL * pose_id) % pose_count == 0) {
    const int quarters = static_cast<int>((4LL * pose_id / pose_count) % 4);
    static const double kCos[4] = {1, 0, -1, 0};
    static const double kSin[4] = {0, 1, 0, -1};
    Mesh out = mesh;
    Eigen::Matrix3d rot;
    rot << kCos[quarters], -kSin[quarters], 0, kSin[quarters], kCos[quarters], 0, 0, 0, 1;
    out.transform(rot, Eigen::Vector3d::Zero());
    return out;
  }
  return rotate_yaw(mesh, 2.0 * M_PI * pose_id / pose_count);
}

}  // namespace ts
