#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tslam/env/probe.hpp"
#include "tslam/util/rng.hpp"

namespace ts::rl {

inline std::vector<double> random_action(int dim, Rng& rng) {
  std::vector<double> a(static_cast<std::size_t>(dim));
  for (double& x : a) x = rng.uniform(-1.0, 1.0);
  return a;
}

// Scripted power-grasp baseline: drive the palm toward the workspace center
// until something is touched (or a step cap runs out), close every finger
// joint at full rate for a fixed window, then back off, re-orient at random,
// and repeat.
class HeuristicPolicy {
 public:
  HeuristicPolicy(env::ProbeSpec spec, std::uint64_t seed)
      : spec_(std::move(spec)), rng_(seed) {
    begin_episode();
  }

  void begin_episode() {
    phase_ = Phase::kApproach;
    phase_t_ = 0;
    retreat_.setZero();
    target_yaw_ = target_pitch_ = target_roll_ = 0.0;
  }

  std::vector<double> act(const std::vector<double>& q, bool contact_last) {
    std::vector<double> a(static_cast<std::size_t>(spec_.action_dim()), 0.0);
    const Eigen::Vector3d p(q[0], q[1], q[2]);

    if (phase_ == Phase::kApproach && (contact_last || phase_t_ >= kApproachCap)) {
      phase_ = Phase::kClose;
      phase_t_ = 0;
    }

    switch (phase_) {
      case Phase::kApproach: {
        const double r = p.norm();
        const Eigen::Vector3d dir = r > 1e-9 ? Eigen::Vector3d(-p / r) : Eigen::Vector3d(0, 0, -1);
        a[0] = dir.x();
        a[1] = dir.y();
        a[2] = dir.z();
        const double yaw_t = std::atan2(-p.y(), -p.x());
        const double pitch_t = r > 1e-9 ? std::acos(std::clamp(-p.z() / r, -1.0, 1.0)) : 0.0;
        a[3] = steer(yaw_t, q[3]);
        a[4] = steer(pitch_t, q[4]);
        break;
      }
      case Phase::kClose: {
        for (int d = 6; d < spec_.action_dim(); ++d) a[static_cast<std::size_t>(d)] = 1.0;
        if (++phase_t_ >= kCloseSteps) {
          phase_ = Phase::kReopen;
          phase_t_ = 0;
          double x, y, z;
          rng_.unit_sphere(x, y, z);
          retreat_ = {x, y, z};
          target_yaw_ = rng_.uniform(-kPi, kPi);
          target_pitch_ = rng_.uniform(-kPi, kPi);
          target_roll_ = rng_.uniform(-kPi, kPi);
        }
        return a;
      }
      case Phase::kReopen: {
        for (int d = 6; d < spec_.action_dim(); ++d) a[static_cast<std::size_t>(d)] = -1.0;
        a[0] = retreat_.x();
        a[1] = retreat_.y();
        a[2] = retreat_.z();
        a[3] = steer(target_yaw_, q[3]);
        a[4] = steer(target_pitch_, q[4]);
        a[5] = steer(target_roll_, q[5]);
        if (++phase_t_ >= kReopenSteps) {
          phase_ = Phase::kApproach;
          phase_t_ = 0;
        }
        return a;
      }
    }
    ++phase_t_;
    return a;
  }

 private:
  enum class Phase { kApproach, kClose, kReopen };
  static constexpr double kPi = 3.14159265358979323846;
  static constexpr int kApproachCap = 30;
  static constexpr int kCloseSteps = 40;
  static constexpr int kReopenSteps = 20;

  // Proportional wrap-aware angle control, saturated to one action unit.
  double steer(double target, double current) const {
    const double err = std::atan2(std::sin(target - current), std::cos(target - current));
    return std::clamp(err / spec_.angle_step, -1.0, 1.0);
  }

  env::ProbeSpec spec_;
  Rng rng_;
  Phase phase_ = Phase::kApproach;
  int phase_t_ = 0;
  Eigen::Vector3d retreat_{0, 0, 0};
  double target_yaw_ = 0.0, target_pitch_ = 0.0, target_roll_ = 0.0;
};

}  // namespace ts::rl
