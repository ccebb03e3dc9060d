#pragma once

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tslam/nn/layers.hpp"
#include "tslam/rl/nets.hpp"
#include "tslam/rl/rollout.hpp"
#include "tslam/util/rng.hpp"

namespace ts::rl {

struct PpoConfig {
  double clip = 0.2;
  int epochs = 4;
  int minibatch = 256;
  double lr = 3e-4;
  double ent_coef = 1e-3;
  double vf_coef = 0.5;
  double gamma = 0.99;
  double lam = 0.95;
  bool squash = true;

  void validate() const {
    if (clip <= 0 || epochs < 1 || minibatch < 1 || lr <= 0)
      throw std::invalid_argument("ppo: bad optimization settings");
    if (gamma < 0 || gamma > 1 || lam < 0 || lam > 1)
      throw std::invalid_argument("ppo: gamma/lambda out of range");
  }
};

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  int minibatches = 0;
};

// log(1 - tanh(u)^2), even in u, overflow-safe.
inline double tanh_log_det(double u) {
  const double a = std::abs(u);
  return 2.0 * (std::log(2.0) - a - std::log1p(std::exp(-2.0 * a)));
}

struct ActionSample {
  std::vector<double> action;     // what the environment receives
  std::vector<double> presquash;  // raw Gaussian draw, stored for updates
  double log_prob = 0.0;
};

// Diagonal-Gaussian log density of a stored pre-squash draw, with the tanh
// Jacobian correction when squashing is on.
inline double action_log_prob(const std::vector<double>& mean,
                              const std::vector<double>& log_std,
                              const std::vector<double>& presquash, bool squash) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  double lp = 0.0;
  for (std::size_t d = 0; d < mean.size(); ++d) {
    const double sd = std::exp(log_std[d]);
    const double z = (presquash[d] - mean[d]) / sd;
    lp += -0.5 * z * z - log_std[d] - 0.5 * kLog2Pi;
    if (squash) lp -= tanh_log_det(presquash[d]);
  }
  return lp;
}

inline ActionSample sample_action(const std::vector<double>& mean,
                                  const std::vector<double>& log_std, Rng& rng, bool squash) {
  if (mean.size() != log_std.size())
    throw std::invalid_argument("sample_action: mean/log_std size mismatch");
  ActionSample out;
  out.presquash.resize(mean.size());
  out.action.resize(mean.size());
  for (std::size_t d = 0; d < mean.size(); ++d) {
    if (!std::isfinite(mean[d]))
      throw std::runtime_error("sample_action: non-finite policy mean");
    const double u = mean[d] + std::exp(log_std[d]) * rng.normal();
    out.presquash[d] = u;
    if (squash) {
      double a = std::tanh(u);
      a = std::min(a, std::nextafter(1.0, 0.0));
      a = std::max(a, std::nextafter(-1.0, 0.0));
      out.action[d] = a;
    } else {
      out.action[d] = u;
    }
  }
  out.log_prob = action_log_prob(mean, log_std, out.presquash, squash);
  return out;
}

// One PPO minibatch: observations plus the stored behavior data.
template <typename T>
struct PpoBatch {
  nn::Tensor<T> grid;      // [B,1,n,n,n]; empty when the net is pose-only
  nn::Tensor<T> pose;      // [B,pose_dim]
  nn::Tensor<T> actions;   // [B,action_dim] pre-squash
  nn::Tensor<T> old_logp;  // [B]
  nn::Tensor<T> adv;       // [B]
  nn::Tensor<T> ret;       // [B]
};

template <typename T>
struct PpoLossNodes {
  int total = -1;
  int policy = -1;
  int value = -1;
  int entropy = -1;
};

// Builds the clipped-surrogate + value + entropy objective on the tape.
template <typename T>
PpoLossNodes<T> ppo_loss(nn::Graph<T>& g, PolicyValueNet<T>& net, PpoBatch<T> batch,
                         const PpoConfig& cfg) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  const int B = batch.pose.dim(0);
  const int A = net.cfg.action_dim;

  nn::Tensor<T> jac;
  if (cfg.squash) {
    jac = nn::Tensor<T>({B});
    for (int i = 0; i < B; ++i) {
      double j = 0.0;
      for (int d = 0; d < A; ++d)
        j += tanh_log_det(
            static_cast<double>(batch.actions.v[static_cast<std::size_t>(i * A + d)]));
      jac.v[static_cast<std::size_t>(i)] = static_cast<T>(j);
    }
  }

  const int pose = g.constant(std::move(batch.pose));
  const int grid = net.cfg.grid_n > 0 ? g.constant(std::move(batch.grid)) : pose;
  int mean_id = -1, value_id = -1;
  net.heads(g, grid, pose, mean_id, value_id);

  const int u = g.constant(std::move(batch.actions));
  const int lstd = net.clamped_log_std(g);
  const int lstd_rows = expand_rows(g, lstd, B);
  const int z = mul(g, sub(g, u, mean_id), exp_(g, muls(g, lstd_rows, T(-1))));
  int logp = muls(g, row_sum(g, square(g, z)), T(-0.5));
  logp = sub(g, logp, row_sum(g, lstd_rows));
  logp = adds(g, logp, static_cast<T>(-0.5 * kLog2Pi * A));
  if (cfg.squash) logp = sub(g, logp, g.constant(std::move(jac)));

  const int ratio = exp_(g, sub(g, logp, g.constant(std::move(batch.old_logp))));
  const int adv = g.constant(std::move(batch.adv));
  const int plain = mul(g, ratio, adv);
  const int clipped =
      mul(g, clamp_(g, ratio, static_cast<T>(1.0 - cfg.clip), static_cast<T>(1.0 + cfg.clip)),
          adv);
  PpoLossNodes<T> nodes;
  nodes.policy = muls(g, mean(g, minimum(g, plain, clipped)), T(-1));

  nodes.value = mse_loss(g, value_id, g.constant(std::move(batch.ret)));

  // Gaussian entropy: sum(log_std) + 0.5*A*(log(2*pi) + 1).
  nodes.entropy = adds(g, sum(g, lstd), static_cast<T>(0.5 * A * (kLog2Pi + 1.0)));

  nodes.total = add(g, nodes.policy, muls(g, nodes.value, static_cast<T>(cfg.vf_coef)));
  nodes.total = add(g, nodes.total, muls(g, nodes.entropy, static_cast<T>(-cfg.ent_coef)));
  return nodes;
}

// Zero-mean unit-std normalization, skipped for degenerate spreads.
inline void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  const double n = static_cast<double>(adv.size());
  const double mu = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mu) * (a - mu);
  const double sd = std::sqrt(var / n);
  if (sd < 1e-8) return;
  for (double& a : adv) a = (a - mu) / sd;
}

template <typename T>
void unpack_grid_bits(const std::uint8_t* bits, std::int64_t cells, T* out) {
  for (std::int64_t i = 0; i < cells; ++i)
    out[i] = static_cast<T>((bits[i >> 3] >> (i & 7)) & 1);
}

// Clipped-surrogate update over the full buffer. Advantages are normalized
// across the whole batch once per call.
template <typename T>
LossStats ppo_update(PolicyValueNet<T>& net, nn::Adam<T>& adam, const RolloutBuffer& buf,
                     const std::vector<double>& advantages, const std::vector<double>& returns,
                     const PpoConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!buf.full()) throw std::invalid_argument("ppo_update: rollout buffer not full");
  const std::size_t n = buf.capacity();
  if (advantages.size() != n || returns.size() != n)
    throw std::invalid_argument("ppo_update: advantage/return size mismatch");

  std::vector<double> adv = advantages;
  normalize_advantages(adv);

  const int pose_dim = buf.pose_dim;
  const int act_dim = buf.action_dim;
  const int grid_n = net.cfg.grid_n;
  const std::int64_t cells =
      grid_n > 0 ? static_cast<std::int64_t>(grid_n) * grid_n * grid_n : 0;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto params = net.params();

  LossStats stats;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.minibatch)) {
      const int B = static_cast<int>(std::min<std::size_t>(cfg.minibatch, n - start));
      PpoBatch<T> batch;
      if (grid_n > 0) batch.grid = nn::Tensor<T>({B, 1, grid_n, grid_n, grid_n});
      batch.pose = nn::Tensor<T>({B, pose_dim});
      batch.actions = nn::Tensor<T>({B, act_dim});
      batch.old_logp = nn::Tensor<T>({B});
      batch.adv = nn::Tensor<T>({B});
      batch.ret = nn::Tensor<T>({B});
      for (int i = 0; i < B; ++i) {
        const std::size_t s = static_cast<std::size_t>(order[start + static_cast<std::size_t>(i)]);
        if (grid_n > 0)
          unpack_grid_bits(buf.grid_at(s), cells,
                           batch.grid.data() + static_cast<std::size_t>(i) * cells);
        for (int d = 0; d < pose_dim; ++d)
          batch.pose.v[static_cast<std::size_t>(i * pose_dim + d)] =
              static_cast<T>(buf.poses[s * static_cast<std::size_t>(pose_dim) +
                                       static_cast<std::size_t>(d)]);
        for (int d = 0; d < act_dim; ++d)
          batch.actions.v[static_cast<std::size_t>(i * act_dim + d)] =
              static_cast<T>(buf.actions[s * static_cast<std::size_t>(act_dim) +
                                         static_cast<std::size_t>(d)]);
        batch.old_logp.v[static_cast<std::size_t>(i)] = static_cast<T>(buf.log_probs[s]);
        batch.adv.v[static_cast<std::size_t>(i)] = static_cast<T>(adv[s]);
        batch.ret.v[static_cast<std::size_t>(i)] = static_cast<T>(returns[s]);
      }

      nn::Graph<T> g;
      const PpoLossNodes<T> nodes = ppo_loss(g, net, std::move(batch), cfg);
      const double pl = static_cast<double>(g.val(nodes.policy).v[0]);
      const double vl = static_cast<double>(g.val(nodes.value).v[0]);
      const double en = static_cast<double>(g.val(nodes.entropy).v[0]);
      if (!std::isfinite(pl) || !std::isfinite(vl) || !std::isfinite(en)) {
        std::ostringstream os;
        os << "ppo_update: non-finite loss (policy=" << pl << ", value=" << vl
           << ", entropy=" << en << ") in epoch " << epoch << " at offset " << start
           << "; minibatch slots:";
        for (int i = 0; i < B; ++i)
          os << ' ' << order[start + static_cast<std::size_t>(i)];
        throw std::runtime_error(os.str());
      }

      nn::Adam<T>::zero_grad(params);
      g.backward(nodes.total);
      adam.step(params);

      stats.policy_loss += pl;
      stats.value_loss += vl;
      stats.entropy += en;
      ++stats.minibatches;
    }
  }
  if (stats.minibatches > 0) {
    stats.policy_loss /= stats.minibatches;
    stats.value_loss /= stats.minibatches;
    stats.entropy /= stats.minibatches;
  }
  return stats;
}

}  // namespace ts::rl
