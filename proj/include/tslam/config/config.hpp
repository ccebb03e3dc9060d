#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tslam/env/probe.hpp"
#include "tslam/recon/recon.hpp"
#include "tslam/reward/reward.hpp"
#include "tslam/rl/nets.hpp"
#include "tslam/rl/ppo.hpp"
#include "tslam/rl/train.hpp"

namespace ts::cfg {

// Every tunable in one flat-keyed record. The canonical serialization (sorted
// key=value lines) feeds the config digest stamped into all artifacts.
struct RunConfig {
  std::uint64_t seed = 0;

  int corpus_size = 100;
  double corpus_holdout = 0.2;
  std::string corpus_families = "box,sphere,cylinder,torus,cup,composite_union,composite_difference";

  int grid_n = 32;

  int horizon = 200;
  int substeps = 4;
  double step_ms = 30.0;
  double sensor_radius = 0.015625;
  double trans_step = 0.03;
  double angle_step = 0.15;
  double joint_step = 0.2;

  std::string reward_variant = "discovery+coverage";
  double reward_lambda = 0.1;
  int reward_k = 5;
  double reward_alpha = 0.0;
  int reward_stride = 1;

  double ppo_clip = 0.2;
  int ppo_epochs = 4;
  int ppo_minibatch = 256;
  double ppo_lr = 3e-4;
  double ppo_ent_coef = 1e-3;
  double ppo_vf_coef = 0.5;
  double ppo_gamma = 0.99;
  double ppo_lam = 0.95;

  std::int64_t rl_budget_steps = 200000;
  int rl_n_envs = 8;
  int rl_pose_count = 4;
  double rl_reward_scale = 0.01;
  int rl_checkpoint_every = 25;
  bool rl_share_encoder = true;
  std::string rl_hidden = "256,128,64";
  double rl_log_std_init = -0.5;

  std::string recon_channels = "8,16,32,32";
  std::string recon_decoder = "128,128,128";
  int recon_points = 2048;
  double recon_lr = 3e-4;
  int recon_epochs = 30;
  bool recon_policy_masks = false;

  int eval_episodes = 5;
  int eval_poses = 4;
  int eval_samples = 10000;
  int eval_out_resolution = 32;
  std::string eval_aggregation = "union";  // or "average"

  std::string paths_corpus = "corpus";
  std::string paths_out = "out";
  std::string paths_policy;
  std::string paths_recon;

  void validate() const;
};

// All registered keys in canonical (sorted) order.
std::vector<std::string> config_keys();

// Set one key. Throws std::invalid_argument on unknown key or bad value.
void set_key(RunConfig& rc, const std::string& key, const std::string& value);
std::string get_key(const RunConfig& rc, const std::string& key);

// key=value lines; '#' comment lines and blank lines ignored; duplicate or
// unknown keys rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::string canonical_text(const RunConfig& rc);
std::uint64_t config_digest(const RunConfig& rc);

std::vector<int> parse_int_list(const std::string& csv);

// Module-config projections. Seeds fan out from the master seed with fixed
// labels: "train-explore", "train-recon", "eval".
env::ProbeSpec probe_spec(const RunConfig& rc);
reward::RewardConfig reward_config(const RunConfig& rc);
rl::PpoConfig ppo_config(const RunConfig& rc);
rl::NetConfig net_config(const RunConfig& rc);
rl::TrainConfig train_config(const RunConfig& rc);
recon::ReconConfig recon_config(const RunConfig& rc);

}  // namespace ts::cfg
