#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ts::env {

// Kinematic multi-finger probe. Action layout: [0..2] base translation,
// [3] base yaw (world z), [4] wrist pitch (local y), [5] wrist roll (about the
// palm axis), then finger joints chain by chain. Fingers extend along the palm
// axis (+z local) when open and curl about their local x axis. One contact
// sensor sphere sits at the end of every link, plus one on the palm.
struct ProbeSpec {
  std::vector<int> finger_joints{4, 4, 4, 5, 5};
  std::vector<double> finger_spread{-0.056, -0.028, 0.0, 0.028, 0.056};
  double palm_length = 0.08;
  double link_length = 0.045;
  double sensor_radius = 0.015625;  // half a voxel edge at N=32

  double trans_step = 0.03;   // per-step displacement limits, workspace units
  double angle_step = 0.15;   // radians, base/wrist
  double joint_step = 0.2;    // radians, finger joints
  double joint_lo = -0.3;
  double joint_hi = 1.8;
  int substeps = 4;
  int horizon = 200;
  double step_ms = 30.0;

  int joint_total() const {
    return std::accumulate(finger_joints.begin(), finger_joints.end(), 0);
  }
  int action_dim() const { return 6 + joint_total(); }
  int sensor_count() const { return 1 + joint_total(); }

  double reach() const {
    int longest = 0;
    for (int j : finger_joints) longest = std::max(longest, j);
    return palm_length + longest * link_length;
  }
  double pos_limit() const { return 0.5 + reach(); }

  double dof_lo(int d) const;
  double dof_hi(int d) const;
  double dof_step(int d) const;

  void validate() const;
};

struct ProbeState {
  std::vector<double> q;  // size = action_dim()

  Eigen::Vector3d base() const { return {q[0], q[1], q[2]}; }
};

// World-frame sensor sphere centers: index 0 is the palm sensor, then one per
// finger link in spec order.
std::vector<Eigen::Vector3d> forward_kinematics(const ProbeSpec& spec, const ProbeState& state);

// Sensors affected by one DOF: base DOFs move everything, a finger joint moves
// that finger's links from the joint outward. Returns [first, last) sensor ids.
std::pair<int, int> moved_sensor_range(const ProbeSpec& spec, int dof);

std::vector<double> normalize_pose(const ProbeSpec& spec, const std::vector<double>& q);
std::vector<double> denormalize_pose(const ProbeSpec& spec, const std::vector<double>& qn);

}  // namespace ts::env
