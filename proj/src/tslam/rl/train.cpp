#include "tslam/rl/train.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "tslam/geom/surface_sample.hpp"
#include "tslam/nn/checkpoint.hpp"

namespace ts::rl {

namespace {

void validate(const std::vector<TrainShape>& shapes, const TrainConfig& cfg) {
  if (shapes.empty()) throw std::invalid_argument("train_explore: shape corpus is empty");
  if (cfg.budget_steps < 0) throw std::invalid_argument("train_explore: negative budget");
  if (cfg.n_envs < 1 || cfg.pose_count < 1)
    throw std::invalid_argument("train_explore: bad env/pose counts");
  if (cfg.out_dir.empty()) throw std::invalid_argument("train_explore: out_dir not set");
  cfg.probe.validate();
  cfg.net.validate();
  cfg.ppo.validate();
  cfg.reward.validate();
  const int n = cfg.net.grid_n;
  for (const TrainShape& s : shapes) {
    if (!s.mesh || !s.grid) throw std::invalid_argument("train_explore: null shape entry");
    if (s.grid->resolution() != n)
      throw std::invalid_argument("train_explore: shape grid resolution does not match net");
  }
  if (cfg.net.pose_dim != cfg.probe.action_dim() || cfg.net.action_dim != cfg.probe.action_dim())
    throw std::invalid_argument("train_explore: net pose/action dims must match the probe");
}

std::string csv_num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

TrainResult train_explore(const std::vector<TrainShape>& shapes, const TrainConfig& cfg) {
  validate(shapes, cfg);

  const int E = cfg.n_envs;
  const int T = cfg.probe.horizon;
  const int A = cfg.probe.action_dim();
  const int n = cfg.net.grid_n;
  const std::int64_t cells = static_cast<std::int64_t>(n) * n * n;
  const long long per_iter = static_cast<long long>(E) * T;
  const int iterations =
      cfg.budget_steps == 0
          ? 0
          : static_cast<int>((cfg.budget_steps + per_iter - 1) / per_iter);

  PolicyValueNet<float> net(cfg.net);
  {
    Rng init_rng(derive_seed(cfg.seed, "net-init"));
    net.init(init_rng);
  }
  nn::Adam<float> adam;
  adam.lr = static_cast<float>(cfg.ppo.lr);

  std::filesystem::create_directories(cfg.out_dir);
  TrainResult res;
  res.checkpoint_path = cfg.out_dir + "/policy.tpol";
  res.log_path = cfg.out_dir + "/train_log.csv";

  std::ofstream log(res.log_path, std::ios::trunc);
  if (!log) throw std::runtime_error("train_explore: cannot open log " + res.log_path);
  log << "iter,env_steps,mean_reward,mean_observed,mean_visited,policy_loss,value_loss,entropy\n";

  auto save = [&] {
    nn::save_tensor_file(res.checkpoint_path, "TPOL", cfg.config_digest,
                         nn::export_params(net.params()));
  };
  save();
  if (iterations == 0) {
    res.iterations = 0;
    res.env_steps = 0;
    return res;
  }

  Rng ep_rng(derive_seed(cfg.seed, "episodes"));
  Rng act_rng(derive_seed(cfg.seed, "actions"));
  Rng up_rng(derive_seed(cfg.seed, "updates"));

  const VoxelGrid layout = VoxelGrid::workspace(n);
  RolloutBuffer buf(E, T, A, A, layout.raw_bits().size());

  std::vector<std::optional<env::TactileEnv>> envs(static_cast<std::size_t>(E));
  std::vector<std::optional<reward::RewardEngine>> engines(static_cast<std::size_t>(E));
  std::vector<env::Observation> obs(static_cast<std::size_t>(E));
  std::vector<double> episode_raw(static_cast<std::size_t>(E));
  std::vector<double> log_std(static_cast<std::size_t>(A));

  std::vector<double> adv, ret, col_r, col_v, col_a, col_ret;
  std::vector<std::uint8_t> col_d;

  for (int iter = 0; iter < iterations; ++iter) {
    for (int e = 0; e < E; ++e) {
      const std::size_t si = ep_rng.uniform_index(shapes.size());
      const int pose = static_cast<int>(ep_rng.uniform_index(
          static_cast<std::uint64_t>(cfg.pose_count)));
      const std::uint64_t env_seed = ep_rng.next_u64();
      const TrainShape& ts_ = shapes[si];
      envs[static_cast<std::size_t>(e)].emplace(cfg.probe, *ts_.mesh, *ts_.grid,
                                                cfg.pose_count);
      envs[static_cast<std::size_t>(e)]->reset(pose, env_seed);
      std::vector<Eigen::Vector3d> gt_samples;
      if (cfg.reward.variant == reward::Variant::kChamfer) {
        const Mesh posed = rotate_yaw_pose(*ts_.mesh, pose, cfg.pose_count);
        gt_samples = sample_points(posed, 2048, derive_seed(env_seed, "gt-samples"));
      }
      engines[static_cast<std::size_t>(e)].emplace(cfg.reward, layout, std::move(gt_samples));
      engines[static_cast<std::size_t>(e)]->begin_episode();
      obs[static_cast<std::size_t>(e)] = envs[static_cast<std::size_t>(e)]->observe();
      episode_raw[static_cast<std::size_t>(e)] = 0.0;
    }
    buf.reset();

    for (int t = 0; t < T; ++t) {
      nn::Graph<float> g;
      nn::Tensor<float> grid_in({E, 1, n, n, n});
      nn::Tensor<float> pose_in({E, A});
      for (int e = 0; e < E; ++e) {
        const env::Observation& o = obs[static_cast<std::size_t>(e)];
        unpack_grid_bits(o.grid.raw_bits().data(), cells,
                         grid_in.data() + static_cast<std::size_t>(e) * cells);
        for (int d = 0; d < A; ++d)
          pose_in.v[static_cast<std::size_t>(e * A + d)] = static_cast<float>(o.pose[
              static_cast<std::size_t>(d)]);
      }
      const int pose_id = g.constant(std::move(pose_in));
      const int grid_id = g.constant(std::move(grid_in));
      int mean_id = -1, value_id = -1;
      net.heads(g, grid_id, pose_id, mean_id, value_id);
      const nn::Tensor<float>& mean = g.val(mean_id);
      const nn::Tensor<float>& value = g.val(value_id);
      for (int d = 0; d < A; ++d) {
        double ls = static_cast<double>(net.log_std().w.v[static_cast<std::size_t>(d)]);
        log_std[static_cast<std::size_t>(d)] =
            std::min(cfg.net.log_std_hi, std::max(cfg.net.log_std_lo, ls));
      }

      for (int e = 0; e < E; ++e) {
        std::vector<double> mu(static_cast<std::size_t>(A));
        for (int d = 0; d < A; ++d)
          mu[static_cast<std::size_t>(d)] =
              static_cast<double>(mean.v[static_cast<std::size_t>(e * A + d)]);
        const ActionSample as = sample_action(mu, log_std, act_rng, cfg.ppo.squash);

        env::TactileEnv& env = *envs[static_cast<std::size_t>(e)];
        const env::StepInfo info = env.step(as.action);
        const reward::StepReward r = engines[static_cast<std::size_t>(e)]->step(info);
        episode_raw[static_cast<std::size_t>(e)] += r.value;

        const std::size_t s = buf.slot(t, e);
        const env::Observation& o = obs[static_cast<std::size_t>(e)];
        std::memcpy(buf.grid_at(s), o.grid.raw_bits().data(), buf.grid_bytes);
        for (int d = 0; d < A; ++d) {
          buf.poses[s * static_cast<std::size_t>(A) + static_cast<std::size_t>(d)] =
              o.pose[static_cast<std::size_t>(d)];
          buf.actions[s * static_cast<std::size_t>(A) + static_cast<std::size_t>(d)] =
              as.presquash[static_cast<std::size_t>(d)];
        }
        buf.log_probs[s] = as.log_prob;
        buf.rewards[s] = r.value * cfg.reward_scale;
        buf.values[s] = static_cast<double>(value.v[static_cast<std::size_t>(e)]);
        buf.dones[s] = t + 1 == T ? 1 : 0;
        obs[static_cast<std::size_t>(e)] = env.observe();
      }
      ++buf.filled;
    }

    adv.assign(buf.capacity(), 0.0);
    ret.assign(buf.capacity(), 0.0);
    for (int e = 0; e < E; ++e) {
      col_r.resize(static_cast<std::size_t>(T));
      col_v.resize(static_cast<std::size_t>(T));
      col_d.resize(static_cast<std::size_t>(T));
      for (int t = 0; t < T; ++t) {
        const std::size_t s = buf.slot(t, e);
        col_r[static_cast<std::size_t>(t)] = buf.rewards[s];
        col_v[static_cast<std::size_t>(t)] = buf.values[s];
        col_d[static_cast<std::size_t>(t)] = buf.dones[s];
      }
      compute_gae(col_r, col_v, col_d, cfg.ppo.gamma, cfg.ppo.lam, col_a, col_ret);
      for (int t = 0; t < T; ++t) {
        const std::size_t s = buf.slot(t, e);
        adv[s] = col_a[static_cast<std::size_t>(t)];
        ret[s] = col_ret[static_cast<std::size_t>(t)];
      }
    }

    const LossStats stats = ppo_update(net, adam, buf, adv, ret, cfg.ppo, up_rng);

    double mean_reward = 0.0, mean_obs = 0.0, mean_vis = 0.0;
    for (int e = 0; e < E; ++e) {
      mean_reward += episode_raw[static_cast<std::size_t>(e)];
      mean_obs += static_cast<double>(envs[static_cast<std::size_t>(e)]->observed()
                                          .count_occupied());
      mean_vis += static_cast<double>(envs[static_cast<std::size_t>(e)]->visited()
                                          .count_occupied());
    }
    mean_reward /= E;
    mean_obs /= E;
    mean_vis /= E;

    const long long steps_done = static_cast<long long>(iter + 1) * per_iter;
    log << iter << ',' << steps_done << ',' << csv_num(mean_reward) << ',' << csv_num(mean_obs)
        << ',' << csv_num(mean_vis) << ',' << csv_num(stats.policy_loss) << ','
        << csv_num(stats.value_loss) << ',' << csv_num(stats.entropy) << '\n';
    log.flush();
    if (!log) throw std::runtime_error("train_explore: log write failed");

    if ((iter + 1) % cfg.checkpoint_every == 0 || iter + 1 == iterations) save();

    res.final_mean_reward = mean_reward;
    res.final_mean_observed = mean_obs;
  }

  res.iterations = iterations;
  res.env_steps = static_cast<long long>(iterations) * per_iter;
  return res;
}

}  // namespace ts::rl
