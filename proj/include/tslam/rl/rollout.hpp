#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ts::rl {

// Flat on-policy storage, one slot per (step, env). Grids are kept bit-packed
// and expanded to floats only when a minibatch is assembled.
struct RolloutBuffer {
  int n_envs = 0;
  int horizon = 0;
  int pose_dim = 0;
  int action_dim = 0;
  std::size_t grid_bytes = 0;

  std::vector<std::uint8_t> grids;   // [N * grid_bytes]
  std::vector<double> poses;         // [N * pose_dim]
  std::vector<double> actions;       // [N * action_dim], pre-squash
  std::vector<double> log_probs;     // [N]
  std::vector<double> rewards;       // [N]
  std::vector<double> values;        // [N]
  std::vector<std::uint8_t> dones;   // [N]
  int filled = 0;                    // completed steps (each n_envs wide)

  RolloutBuffer(int envs, int steps, int pose, int action, std::size_t bytes_per_grid)
      : n_envs(envs),
        horizon(steps),
        pose_dim(pose),
        action_dim(action),
        grid_bytes(bytes_per_grid) {
    const std::size_t n = capacity();
    grids.resize(n * grid_bytes);
    poses.resize(n * static_cast<std::size_t>(pose_dim));
    actions.resize(n * static_cast<std::size_t>(action_dim));
    log_probs.resize(n);
    rewards.resize(n);
    values.resize(n);
    dones.resize(n);
  }

  std::size_t capacity() const {
    return static_cast<std::size_t>(n_envs) * static_cast<std::size_t>(horizon);
  }
  std::size_t slot(int t, int e) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(n_envs) +
           static_cast<std::size_t>(e);
  }
  bool full() const { return filled == horizon; }
  void reset() { filled = 0; }

  const std::uint8_t* grid_at(std::size_t s) const { return grids.data() + s * grid_bytes; }
  std::uint8_t* grid_at(std::size_t s) { return grids.data() + s * grid_bytes; }
};

// A_t = sum_l (gamma*lam)^l * delta_{t+l}, delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t,
// truncated at the end of the buffer (V_{T} treated as 0 past the end unless
// bootstrap is given). returns_t = A_t + V_t.
inline void compute_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<std::uint8_t>& dones, double gamma, double lam,
                        std::vector<double>& advantages, std::vector<double>& returns,
                        double bootstrap_value = 0.0) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw std::invalid_argument("compute_gae: length mismatch");
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double next_v = (i + 1 < n) ? values[i + 1] : bootstrap_value;
    const double delta = rewards[i] + gamma * next_v * not_done - values[i];
    carry = delta + gamma * lam * not_done * carry;
    advantages[i] = carry;
    returns[i] = carry + values[i];
  }
}

}  // namespace ts::rl
