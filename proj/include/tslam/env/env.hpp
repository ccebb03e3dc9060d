#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tslam/env/probe.hpp"
#include "tslam/geom/mesh.hpp"
#include "tslam/geom/voxel_grid.hpp"
#include "tslam/util/rng.hpp"

namespace ts::env {

struct ContactEvent {
  int sensor = -1;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  std::array<int, 3> cell{};
  int t = -1;
};

struct StepInfo {
  std::vector<std::int64_t> swept_cells;    // every cell overlapped this step
  std::vector<std::int64_t> contact_cells;  // occupied cells overlapped this step
  std::vector<ContactEvent> events;         // newly observed cells only
  bool contact_any = false;
  int new_observed = 0;
  int new_visited = 0;
  int blocked_dofs = 0;
  double duration_ms = 0.0;
};

struct Observation {
  VoxelGrid grid;            // observed occupancy, agent frame
  std::vector<double> pose;  // base pose + joint angles, normalized to [-1,1]
};

struct StepRecord {
  int t = 0;
  std::vector<double> action;
  int contacts = 0;
  int new_cells = 0;
};

void write_trace(std::ostream& os, const std::vector<StepRecord>& steps);

// Exploration MDP over one shape. The agent sweeps sensor spheres through the
// workspace grid; cells it touches become "visited", touched cells that are
// occupied in the hidden ground truth become "observed". Motion integrates
// per DOF in fixed order with substeps, and a DOF stops for the rest of the
// step when it would push a sensor center deeper than its radius into the
// occupied solid.
class TactileEnv {
 public:
  TactileEnv(ProbeSpec spec, Mesh shape_mesh, VoxelGrid shape_grid, int pose_count);

  void reset(int pose_id, std::uint64_t seed);
  // Scripted-scenario hook: explicit ground truth and start pose, no RNG.
  void reset_raw(VoxelGrid gt, ProbeState start);

  StepInfo step(const std::vector<double>& action);
  Observation observe() const;

  const ProbeSpec& spec() const { return spec_; }
  const VoxelGrid& ground_truth() const { return gt_; }
  const VoxelGrid& observed() const { return observed_; }
  const VoxelGrid& visited() const { return visited_; }
  const ProbeState& probe() const { return probe_; }
  const std::vector<Eigen::Vector3d>& sensor_sites() const { return sites_; }
  int t() const { return t_; }
  int pose_id() const { return pose_id_; }
  double pose_yaw() const { return yaw_; }
  int pose_count() const { return pose_count_; }
  bool done() const { return t_ >= spec_.horizon; }
  double episode_seconds() const { return t_ * spec_.step_ms / 1000.0; }

  // Depth of a point inside the occupied solid: distance to the nearest free
  // cell box (cells outside the grid count as free). Zero in free space.
  double penetration_depth(const Eigen::Vector3d& p) const;

 private:
  void mark_sensors(int first, int last, StepInfo& info);
  bool depth_ok(int first, int last) const;
  bool sensor_touches_occupied(const Eigen::Vector3d& s) const;

  ProbeSpec spec_;
  Mesh canon_mesh_;
  VoxelGrid canon_grid_;
  int pose_count_ = 4;

  VoxelGrid gt_, observed_, visited_;
  ProbeState probe_;
  std::vector<Eigen::Vector3d> sites_;
  int t_ = 0;
  int pose_id_ = 0;
  double yaw_ = 0.0;
  bool ready_ = false;
};

}  // namespace ts::env
