#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tslam/nn/layers.hpp"
#include "tslam/nn/ops3d.hpp"
#include "tslam/util/rng.hpp"

namespace ts::rl {

struct NetConfig {
  int grid_n = 32;  // 0 disables the grid encoder (pose-only networks)
  int pose_dim = 28;
  int action_dim = 28;
  std::vector<int> hidden{256, 128, 64};
  double log_std_init = -0.5;
  double log_std_lo = -5.0;
  double log_std_hi = 2.0;
  bool share_encoder = true;

  static constexpr std::array<int, 6> kChannels{8, 16, 16, 32, 32, 32};
  static constexpr std::array<int, 6> kStrides{2, 1, 2, 1, 2, 1};

  int encoder_features() const {
    if (grid_n == 0) return 0;
    const int spatial = grid_n / 8;  // three stride-2 halvings
    return kChannels.back() * spatial * spatial * spatial;
  }
  int feature_dim() const { return encoder_features() + pose_dim; }

  void validate() const {
    if (grid_n != 0 && grid_n % 8 != 0)
      throw std::invalid_argument("net: grid resolution must be divisible by 8");
    if (pose_dim < 1 || action_dim < 1) throw std::invalid_argument("net: bad dimensions");
    if (hidden.empty()) throw std::invalid_argument("net: need at least one hidden layer");
    if (log_std_lo >= log_std_hi) throw std::invalid_argument("net: log-std bounds inverted");
  }
};

// Six 3D conv layers over the observed grid, stride 2 on the first, third and
// fifth, flattened to a feature row per sample.
template <typename T>
struct ConvEncoder {
  std::vector<nn::Conv3dLayer<T>> convs;
  int grid_n = 0;

  ConvEncoder() = default;
  ConvEncoder(const std::string& prefix, int n) : grid_n(n) {
    int cin = 1;
    for (std::size_t i = 0; i < NetConfig::kChannels.size(); ++i) {
      convs.emplace_back(prefix + ".conv" + std::to_string(i), cin, NetConfig::kChannels[i], 3,
                         NetConfig::kStrides[i], 1);
      cin = NetConfig::kChannels[i];
    }
  }

  void init(Rng& rng) {
    for (auto& c : convs) c.init(rng);
  }

  int forward(nn::Graph<T>& g, int x) {
    for (auto& c : convs) x = relu(g, c.forward(g, x));
    const int batch = g.val(x).dim(0);
    return reshape(g, x, {batch, static_cast<int>(g.val(x).numel()) / batch});
  }

  void collect(std::vector<nn::Param<T>*>& out) {
    for (auto& c : convs) c.collect(out);
  }
};

// Policy mean + value heads over the shared (or split) grid encoder, with a
// state-independent learnable log-std vector.
template <typename T>
class PolicyValueNet {
 public:
  NetConfig cfg;

  explicit PolicyValueNet(NetConfig config) : cfg(std::move(config)) {
    cfg.validate();
    std::vector<int> pi_widths{cfg.feature_dim()};
    pi_widths.insert(pi_widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    std::vector<int> vf_widths = pi_widths;
    pi_widths.push_back(cfg.action_dim);
    vf_widths.push_back(1);

    if (cfg.grid_n > 0) {
      enc_ = ConvEncoder<T>("enc", cfg.grid_n);
      if (!cfg.share_encoder) venc_ = ConvEncoder<T>("venc", cfg.grid_n);
    }
    pi_ = nn::Mlp<T>("pi", pi_widths);
    vf_ = nn::Mlp<T>("vf", vf_widths);
    log_std_ = nn::Param<T>("log_std", {cfg.action_dim});
    log_std_.w.fill(static_cast<T>(cfg.log_std_init));
  }

  void init(Rng& rng) {
    if (cfg.grid_n > 0) {
      enc_.init(rng);
      if (venc_) venc_->init(rng);
    }
    pi_.init(rng, 0.01);  // small policy head keeps early actions near zero
    vf_.init(rng, 1.0);
    log_std_.w.fill(static_cast<T>(cfg.log_std_init));
  }

  std::vector<nn::Param<T>*> params() {
    std::vector<nn::Param<T>*> out;
    if (cfg.grid_n > 0) {
      enc_.collect(out);
      if (venc_) venc_->collect(out);
    }
    pi_.collect(out);
    vf_.collect(out);
    out.push_back(&log_std_);
    return out;
  }

  std::vector<nn::Param<T>*> policy_mean_params() {
    std::vector<nn::Param<T>*> out;
    if (cfg.grid_n > 0) enc_.collect(out);
    pi_.collect(out);
    return out;
  }

  // grid: node over [B,1,n,n,n] (ignored when grid_n==0); pose: node [B,pose_dim]
  int policy_mean(nn::Graph<T>& g, int grid, int pose) {
    return pi_.forward(g, features(g, grid, pose, false));
  }

  int value(nn::Graph<T>& g, int grid, int pose) {
    const int v = vf_.forward(g, features(g, grid, pose, true));
    return reshape(g, v, {g.val(v).dim(0)});
  }

  // Both heads in one pass; with a shared encoder the grid is encoded once.
  void heads(nn::Graph<T>& g, int grid, int pose, int& mean_out, int& value_out) {
    const int pf = features(g, grid, pose, false);
    mean_out = pi_.forward(g, pf);
    const int vf_in = (cfg.grid_n > 0 && venc_) ? features(g, grid, pose, true) : pf;
    const int v = vf_.forward(g, vf_in);
    value_out = reshape(g, v, {g.val(v).dim(0)});
  }

  int clamped_log_std(nn::Graph<T>& g) {
    return clamp_(g, g.param(log_std_), static_cast<T>(cfg.log_std_lo),
                  static_cast<T>(cfg.log_std_hi));
  }

  const nn::Param<T>& log_std() const { return log_std_; }
  nn::Param<T>& log_std() { return log_std_; }

 private:
  int features(nn::Graph<T>& g, int grid, int pose, bool value_branch) {
    if (cfg.grid_n == 0) return pose;
    ConvEncoder<T>& enc = (value_branch && venc_) ? *venc_ : enc_;
    return concat_cols(g, enc.forward(g, grid), pose);
  }

  ConvEncoder<T> enc_;
  std::optional<ConvEncoder<T>> venc_;
  nn::Mlp<T> pi_, vf_;
  nn::Param<T> log_std_;
};

}  // namespace ts::rl
