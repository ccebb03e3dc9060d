#include "tslam/env/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "tslam/geom/voxelize.hpp"

namespace ts::env {

namespace {

// Squared distance from a point to an axis-aligned cell box.
double box_dist_sq(const Eigen::Vector3d& p, const Eigen::Vector3d& lo,
                   const Eigen::Vector3d& hi) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = p[a] < lo[a] ? lo[a] - p[a] : (p[a] > hi[a] ? p[a] - hi[a] : 0.0);
    d2 += d * d;
  }
  return d2;
}

}  // namespace

void write_trace(std::ostream& os, const std::vector<StepRecord>& steps) {
  for (const StepRecord& s : steps) {
    os << s.t;
    for (double a : s.action) os << ' ' << a;
    os << ' ' << s.contacts << ' ' << s.new_cells << '\n';
  }
}

TactileEnv::TactileEnv(ProbeSpec spec, Mesh shape_mesh, VoxelGrid shape_grid, int pose_count)
    : spec_(std::move(spec)),
      canon_mesh_(std::move(shape_mesh)),
      canon_grid_(std::move(shape_grid)),
      pose_count_(pose_count) {
  spec_.validate();
  if (pose_count_ < 1) throw std::invalid_argument("env: pose_count must be positive");
  if (canon_grid_.resolution() < 2) throw std::invalid_argument("env: shape grid missing");
}

void TactileEnv::reset(int pose_id, std::uint64_t seed) {
  if (pose_id < 0 || pose_id >= pose_count_)
    throw std::invalid_argument("reset: pose_id out of range");
  pose_id_ = pose_id;
  yaw_ = 2.0 * M_PI * pose_id / pose_count_;
  if (pose_id == 0) {
    gt_ = canon_grid_;
  } else {
    gt_ = voxelize_workspace(rotate_yaw_pose(canon_mesh_, pose_id, pose_count_),
                             canon_grid_.resolution());
  }
  observed_ = VoxelGrid(canon_grid_.resolution(), gt_.bbox_min(), gt_.bbox_max());
  visited_ = observed_;
  t_ = 0;

  Rng rng(seed);
  probe_.q.assign(static_cast<std::size_t>(spec_.action_dim()), 0.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double dx, dy, dz;
    rng.unit_sphere(dx, dy, dz);
    const double radius = std::min(0.62 + 0.004 * attempt, spec_.pos_limit() - 0.005);
    probe_.q[0] = radius * dx;
    probe_.q[1] = radius * dy;
    probe_.q[2] = radius * dz;
    // Palm axis points at the workspace center.
    probe_.q[3] = std::atan2(-dy, -dx);
    probe_.q[4] = std::acos(std::clamp(-dz, -1.0, 1.0));
    probe_.q[5] = rng.uniform(-M_PI, M_PI);
    std::fill(probe_.q.begin() + 6, probe_.q.end(), 0.0);

    sites_ = forward_kinematics(spec_, probe_);
    bool clear_of_contact = true;
    for (const auto& s : sites_)
      if (sensor_touches_occupied(s)) {
        clear_of_contact = false;
        break;
      }
    if (clear_of_contact) {
      ready_ = true;
      return;
    }
  }
  throw std::runtime_error("reset: no collision-free start pose found");
}

bool TactileEnv::sensor_touches_occupied(const Eigen::Vector3d& s) const {
  const double r = spec_.sensor_radius;
  const double e = gt_.edge();
  const int n = gt_.resolution();
  const int x0 = std::max(0, static_cast<int>(std::floor((s.x() - r - gt_.bbox_min().x()) / e)));
  const int y0 = std::max(0, static_cast<int>(std::floor((s.y() - r - gt_.bbox_min().y()) / e)));
  const int z0 = std::max(0, static_cast<int>(std::floor((s.z() - r - gt_.bbox_min().z()) / e)));
  const int x1 = std::min(n - 1, static_cast<int>(std::floor((s.x() + r - gt_.bbox_min().x()) / e)));
  const int y1 = std::min(n - 1, static_cast<int>(std::floor((s.y() + r - gt_.bbox_min().y()) / e)));
  const int z1 = std::min(n - 1, static_cast<int>(std::floor((s.z() + r - gt_.bbox_min().z()) / e)));
  for (int z = z0; z <= z1; ++z)
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        if (!gt_.get(x, y, z)) continue;
        const Eigen::Vector3d lo = gt_.bbox_min() + e * Eigen::Vector3d(x, y, z);
        if (box_dist_sq(s, lo, lo.array() + e) <= r * r) return true;
      }
  return false;
}

void TactileEnv::reset_raw(VoxelGrid gt, ProbeState start) {
  if (static_cast<int>(start.q.size()) != spec_.action_dim())
    throw std::invalid_argument("reset_raw: state size mismatch");
  gt_ = std::move(gt);
  observed_ = VoxelGrid(gt_.resolution(), gt_.bbox_min(), gt_.bbox_max());
  visited_ = observed_;
  probe_ = std::move(start);
  sites_ = forward_kinematics(spec_, probe_);
  t_ = 0;
  pose_id_ = 0;
  yaw_ = 0.0;
  ready_ = true;
}

double TactileEnv::penetration_depth(const Eigen::Vector3d& p) const {
  int x, y, z;
  if (!gt_.locate(p, x, y, z)) return 0.0;
  if (!gt_.get(x, y, z)) return 0.0;
  const double e = gt_.edge();
  double best = std::numeric_limits<double>::infinity();
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const int nx = x + dx, ny = y + dy, nz = z + dz;
        if (gt_.in_bounds(nx, ny, nz) && gt_.get(nx, ny, nz)) continue;  // occupied, not free
        const Eigen::Vector3d lo = gt_.bbox_min() + e * Eigen::Vector3d(nx, ny, nz);
        best = std::min(best, box_dist_sq(p, lo, lo.array() + e));
      }
  // No free cell in the 3x3x3 ring: depth certainly exceeds one cell edge.
  if (!std::isfinite(best)) return e;
  return std::sqrt(best);
}

bool TactileEnv::depth_ok(int first, int last) const {
  const double r = spec_.sensor_radius;
  for (int i = first; i < last; ++i)
    if (penetration_depth(sites_[static_cast<std::size_t>(i)]) > r + 1e-12) return false;
  return true;
}

void TactileEnv::mark_sensors(int first, int last, StepInfo& info) {
  const double r = spec_.sensor_radius;
  const double e = gt_.edge();
  const int n = gt_.resolution();
  for (int si = first; si < last; ++si) {
    const Eigen::Vector3d& s = sites_[static_cast<std::size_t>(si)];
    const int x0 = std::max(0, static_cast<int>(std::floor((s.x() - r - gt_.bbox_min().x()) / e)));
    const int y0 = std::max(0, static_cast<int>(std::floor((s.y() - r - gt_.bbox_min().y()) / e)));
    const int z0 = std::max(0, static_cast<int>(std::floor((s.z() - r - gt_.bbox_min().z()) / e)));
    const int x1 = std::min(n - 1, static_cast<int>(std::floor((s.x() + r - gt_.bbox_min().x()) / e)));
    const int y1 = std::min(n - 1, static_cast<int>(std::floor((s.y() + r - gt_.bbox_min().y()) / e)));
    const int z1 = std::min(n - 1, static_cast<int>(std::floor((s.z() + r - gt_.bbox_min().z()) / e)));
    for (int z = z0; z <= z1; ++z)
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const Eigen::Vector3d lo = gt_.bbox_min() + e * Eigen::Vector3d(x, y, z);
          const Eigen::Vector3d hi = lo.array() + e;
          if (box_dist_sq(s, lo, hi) > r * r) continue;
          const std::int64_t idx = gt_.index(x, y, z);
          info.swept_cells.push_back(idx);
          if (!visited_.get(idx)) {
            visited_.set(idx, true);
            ++info.new_visited;
          }
          if (!gt_.get(idx)) continue;
          info.contact_cells.push_back(idx);
          info.contact_any = true;
          if (!observed_.get(idx)) {
            observed_.set(idx, true);
            ++info.new_observed;
            ContactEvent ev;
            ev.sensor = si;
            // Sensor center projected onto the cell surface, nudged inward so
            // the containing-cell relation is unambiguous.
            Eigen::Vector3d cp = s.cwiseMax(lo).cwiseMin(hi);
            if (cp == s) {
              int ax = 0;
              double best = std::numeric_limits<double>::infinity();
              double face = 0.0;
              for (int a = 0; a < 3; ++a) {
                if (s[a] - lo[a] < best) { best = s[a] - lo[a]; ax = a; face = lo[a]; }
                if (hi[a] - s[a] < best) { best = hi[a] - s[a]; ax = a; face = hi[a]; }
              }
              cp[ax] = face;
            }
            const Eigen::Vector3d center = gt_.cell_center(x, y, z);
            cp += 1e-9 * (center - cp);
            ev.point = cp;
            ev.cell = {x, y, z};
            ev.t = t_;
            info.events.push_back(ev);
          }
        }
  }
}

StepInfo TactileEnv::step(const std::vector<double>& action) {
  if (!ready_) throw std::logic_error("step: reset was never called");
  if (t_ >= spec_.horizon) throw std::logic_error("step: episode is finished");
  if (static_cast<int>(action.size()) != spec_.action_dim())
    throw std::invalid_argument("step: action size mismatch");

  StepInfo info;
  mark_sensors(0, spec_.sensor_count(), info);

  const int dims = spec_.action_dim();
  std::vector<char> blocked(static_cast<std::size_t>(dims), 0);
  for (int sub = 0; sub < spec_.substeps; ++sub) {
    for (int d = 0; d < dims; ++d) {
      if (blocked[static_cast<std::size_t>(d)]) continue;
      const double a = std::clamp(action[static_cast<std::size_t>(d)], -1.0, 1.0);
      const double delta = a * spec_.dof_step(d) / spec_.substeps;
      if (delta == 0.0) continue;
      const double old = probe_.q[static_cast<std::size_t>(d)];
      const double next = std::clamp(old + delta, spec_.dof_lo(d), spec_.dof_hi(d));
      if (next == old) continue;
      probe_.q[static_cast<std::size_t>(d)] = next;
      sites_ = forward_kinematics(spec_, probe_);
      const auto [first, last] = moved_sensor_range(spec_, d);
      if (!depth_ok(first, last)) {
        probe_.q[static_cast<std::size_t>(d)] = old;
        sites_ = forward_kinematics(spec_, probe_);
        blocked[static_cast<std::size_t>(d)] = 1;
        ++info.blocked_dofs;
        continue;
      }
      mark_sensors(first, last, info);
    }
  }

  auto dedupe = [](std::vector<std::int64_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedupe(info.swept_cells);
  dedupe(info.contact_cells);
  info.duration_ms = spec_.step_ms;
  ++t_;
  return info;
}

Observation TactileEnv::observe() const {
  if (!ready_) throw std::logic_error("observe: reset was never called");
  Observation obs;
  obs.grid = observed_;
  obs.pose = normalize_pose(spec_, probe_.q);
  return obs;
}

}  // namespace ts::env
