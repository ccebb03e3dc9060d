#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslam/env/env.hpp"
#include "tslam/reward/reward.hpp"
#include "tslam/rl/nets.hpp"
#include "tslam/rl/ppo.hpp"

namespace ts::rl {

// One training shape: canonical-pose mesh plus its voxelization.
struct TrainShape {
  const Mesh* mesh = nullptr;
  const VoxelGrid* grid = nullptr;
};

struct TrainConfig {
  std::uint64_t seed = 0;
  long long budget_steps = 200000;
  int n_envs = 8;
  int pose_count = 4;
  double reward_scale = 0.01;  // applied to advantage/return targets only
  int checkpoint_every = 25;   // iterations between checkpoint rewrites
  std::string out_dir;
  std::uint64_t config_digest = 0;

  env::ProbeSpec probe;
  NetConfig net;
  PpoConfig ppo;
  reward::RewardConfig reward;
};

struct TrainResult {
  std::string checkpoint_path;
  std::string log_path;
  int iterations = 0;
  long long env_steps = 0;
  double final_mean_reward = 0.0;
  double final_mean_observed = 0.0;
};

// Synchronous on-policy loop: every iteration runs one full episode in each
// environment, then performs a PPO update over the gathered buffer. Writes
// policy.tpol and train_log.csv under cfg.out_dir.
TrainResult train_explore(const std::vector<TrainShape>& shapes, const TrainConfig& cfg);

}  // namespace ts::rl
