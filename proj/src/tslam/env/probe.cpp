#include "tslam/env/probe.hpp"

#include <cmath>

namespace ts::env {

namespace {

Eigen::Matrix3d rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}

Eigen::Matrix3d rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << c, 0, s, 0, 1, 0, -s, 0, c;
  return m;
}

Eigen::Matrix3d rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

}  // namespace

void ProbeSpec::validate() const {
  if (finger_joints.empty() || finger_joints.size() != finger_spread.size())
    throw std::invalid_argument("probe: finger joint/spread size mismatch");
  for (int j : finger_joints)
    if (j < 1) throw std::invalid_argument("probe: finger needs at least one joint");
  if (sensor_radius <= 0 || link_length <= 0 || palm_length < 0)
    throw std::invalid_argument("probe: nonpositive geometry");
  if (joint_lo >= joint_hi) throw std::invalid_argument("probe: joint limits inverted");
  if (substeps < 1 || horizon < 1) throw std::invalid_argument("probe: bad integration settings");
}

double ProbeSpec::dof_lo(int d) const {
  if (d < 3) return -pos_limit();
  if (d < 6) return -M_PI;
  return joint_lo;
}

double ProbeSpec::dof_hi(int d) const {
  if (d < 3) return pos_limit();
  if (d < 6) return M_PI;
  return joint_hi;
}

double ProbeSpec::dof_step(int d) const {
  if (d < 3) return trans_step;
  if (d < 6) return angle_step;
  return joint_step;
}

std::vector<Eigen::Vector3d> forward_kinematics(const ProbeSpec& spec, const ProbeState& state) {
  if (static_cast<int>(state.q.size()) != spec.action_dim())
    throw std::invalid_argument("forward_kinematics: state size mismatch");
  const Eigen::Vector3d base = state.base();
  const Eigen::Matrix3d rb = rot_z(state.q[3]) * rot_y(state.q[4]) * rot_z(state.q[5]);

  std::vector<Eigen::Vector3d> sites;
  sites.reserve(static_cast<std::size_t>(spec.sensor_count()));
  sites.push_back(base + rb * Eigen::Vector3d(0, 0, 0.5 * spec.palm_length));

  int qi = 6;
  for (std::size_t f = 0; f < spec.finger_joints.size(); ++f) {
    Eigen::Vector3d p = base + rb * Eigen::Vector3d(spec.finger_spread[f], 0, spec.palm_length);
    Eigen::Matrix3d r = rb;
    for (int j = 0; j < spec.finger_joints[f]; ++j, ++qi) {
      r = r * rot_x(state.q[static_cast<std::size_t>(qi)]);
      p = p + r * Eigen::Vector3d(0, 0, spec.link_length);
      sites.push_back(p);
    }
  }
  return sites;
}

std::pair<int, int> moved_sensor_range(const ProbeSpec& spec, int dof) {
  if (dof < 6) return {0, spec.sensor_count()};
  int qi = 6, site = 1;
  for (std::size_t f = 0; f < spec.finger_joints.size(); ++f) {
    const int j = spec.finger_joints[f];
    if (dof < qi + j) {
      const int offset = dof - qi;  // links at and beyond the joint move
      return {site + offset, site + j};
    }
    qi += j;
    site += j;
  }
  throw std::invalid_argument("moved_sensor_range: dof out of range");
}

std::vector<double> normalize_pose(const ProbeSpec& spec, const std::vector<double>& q) {
  if (static_cast<int>(q.size()) != spec.action_dim())
    throw std::invalid_argument("normalize_pose: size mismatch");
  std::vector<double> out(q.size());
  for (std::size_t d = 0; d < q.size(); ++d) {
    const double lo = spec.dof_lo(static_cast<int>(d)), hi = spec.dof_hi(static_cast<int>(d));
    out[d] = 2.0 * (q[d] - lo) / (hi - lo) - 1.0;
  }
  return out;
}

std::vector<double> denormalize_pose(const ProbeSpec& spec, const std::vector<double>& qn) {
  if (static_cast<int>(qn.size()) != spec.action_dim())
    throw std::invalid_argument("denormalize_pose: size mismatch");
  std::vector<double> out(qn.size());
  for (std::size_t d = 0; d < qn.size(); ++d) {
    const double lo = spec.dof_lo(static_cast<int>(d)), hi = spec.dof_hi(static_cast<int>(d));
    out[d] = lo + (qn[d] + 1.0) * 0.5 * (hi - lo);
  }
  return out;
}

}  // namespace ts::env
