#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslam/env/env.hpp"
#include "tslam/geom/voxel_grid.hpp"

namespace ts::reward {

enum class Variant {
  kDiscoveryCoverage,  // r = r_d + lambda * r_c
  kNoCoverage,         // r = r_d
  kNoDiscovery,        // r = lambda * r_c
  kKnn,
  kPoints,
  kContact,
  kDisagreement,
  kChamfer,
};

Variant parse_variant(const std::string& tag);
std::string variant_tag(Variant v);

struct RewardConfig {
  Variant variant = Variant::kDiscoveryCoverage;
  double lambda = 0.1;
  int k = 5;
  double alpha = 0.0;  // <= 0 keeps the full hull
  int stride = 1;      // disagreement recomputation interval

  void validate() const;
};

// Count of contacted occupied cells not yet observed.
int discovery_reward(const std::vector<std::int64_t>& contact_cells,
                     const VoxelGrid& previously_observed);

// Count of swept cells not yet visited.
int coverage_reward(const std::vector<std::int64_t>& swept_cells,
                    const VoxelGrid& previously_visited);

double combined_reward(int r_d, int r_c, double lambda);

// Mean over new points of the mean distance to their k nearest accumulated
// points; k is truncated to the accumulated size; empty accumulated or empty
// new points give 0.
double knn_reward(const std::vector<Eigen::Vector3d>& new_points,
                  const std::vector<Eigen::Vector3d>& accumulated, int k = 5);

// Count of contact points in cells never contacted before, deduplicated at
// voxel granularity. Points outside the grid are ignored.
int points_reward(const std::vector<Eigen::Vector3d>& new_contact_points,
                  const VoxelGrid& previously_contacted);

int contact_reward(bool any_contact);

// Chamfer between surface samples of the alpha shapes (convex hull fallback)
// of the two clouds; 0 when either hull is degenerate.
double disagreement_reward(const std::vector<Eigen::Vector3d>& points_before,
                           const std::vector<Eigen::Vector3d>& points_after, double alpha,
                           int n_samples = 2048, std::uint64_t seed = 0);

// 1/(1e-4 + chamfer) against fixed ground-truth samples; 0 when the
// accumulated cloud is empty.
double chamfer_reward(const std::vector<Eigen::Vector3d>& accumulated,
                      const std::vector<Eigen::Vector3d>& gt_surface_samples);

struct StepReward {
  double value = 0.0;
  int discovery = 0;
  int coverage = 0;
};

// Stateful per-episode wrapper: tracks its own observed/visited/contact sets
// built from raw step info, independent of the environment's bookkeeping.
class RewardEngine {
 public:
  RewardEngine(RewardConfig cfg, VoxelGrid layout,
               std::vector<Eigen::Vector3d> gt_surface_samples = {});

  void begin_episode();
  StepReward step(const env::StepInfo& info);

  std::int64_t observed_count() const { return observed_.count_occupied(); }
  std::int64_t visited_count() const { return visited_.count_occupied(); }
  const std::vector<Eigen::Vector3d>& accumulated_points() const { return cloud_; }

 private:
  RewardConfig cfg_;
  VoxelGrid observed_, visited_;
  std::vector<Eigen::Vector3d> cloud_, snapshot_;
  std::vector<Eigen::Vector3d> gt_samples_;
  int t_ = 0;
};

}  // namespace ts::reward
