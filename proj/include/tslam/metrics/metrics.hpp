#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslam/geom/mesh.hpp"
#include "tslam/geom/voxel_grid.hpp"

namespace ts::metrics {

// Worst-case squared distance inside the unit workspace cube; returned when a
// prediction is empty so averages stay finite.
inline constexpr double kChamferEmptySentinel = 3.0;

// |a AND b| / |a OR b|; 1 when both grids are empty. Throws on layout mismatch.
double volumetric_iou(const VoxelGrid& a, const VoxelGrid& b);

// Symmetric mean squared nearest-neighbor distance between two point sets:
// 0.5 * (mean_a min_b |a-b|^2 + mean_b min_a |b-a|^2). Either side empty
// yields the sentinel.
double chamfer_l2_points(const std::vector<Eigen::Vector3d>& a,
                         const std::vector<Eigen::Vector3d>& b);

// Chamfer over area-uniform surface samples. Both meshes are sampled with the
// same derived RNG stream, so swapping the arguments is exactly symmetric.
double chamfer_l2(const Mesh& a, const Mesh& b, int n_samples = 10000,
                  std::uint64_t seed = 0);

// Symmetrized mean |n_p . n_q| between each sample and its nearest neighbor
// on the other mesh. Empty input gives 0.
double normal_consistency(const Mesh& a, const Mesh& b, int n_samples = 10000,
                          std::uint64_t seed = 0);

struct MetricsTriple {
  double iou = 0.0;
  double chamfer_l2 = kChamferEmptySentinel;  // squared distances, workspace units
  double normal_consistency = 0.0;
};

struct MetricsReport {
  MetricsTriple grid;   // observed occupancy grid vs ground truth
  MetricsTriple recon;  // reconstructed mesh vs ground truth
  int n_samples = 0;
  std::uint64_t seed = 0;
};

struct EvalConfig {
  int n_samples = 10000;
  std::uint64_t seed = 0;
  // Cell-center occupancy of the reconstruction, when the caller has one.
  // Otherwise the reconstructed mesh is voxelized at the ground-truth layout.
  const VoxelGrid* recon_grid = nullptr;
};

// Grid row: observed grid IoU plus chamfer/normals of its blocky boundary
// mesh. Recon row: the same three metrics for the reconstructed mesh.
MetricsReport evaluate_run(const VoxelGrid& observed_grid, const Mesh& recon_mesh,
                           const VoxelGrid& gt_grid, const Mesh& gt_mesh,
                           const EvalConfig& cfg = {});

std::string csv_header();
std::string csv_row(const std::string& shape_id, const std::string& policy_tag,
                    int poses, const MetricsReport& r);

}  // namespace ts::metrics
