#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "tslam/geom/mesh.hpp"
#include "tslam/geom/voxel_grid.hpp"
#include "tslam/nn/layers.hpp"
#include "tslam/nn/ops3d.hpp"
#include "tslam/util/rng.hpp"

namespace ts::recon {

struct ReconConfig {
  int grid_n = 32;
  std::vector<int> channels{8, 16, 32, 32};  // stage k lives at grid_n / 2^k... stage 0 at grid_n
  std::vector<int> decoder_hidden{128, 128, 128};
  int points_per_sample = 2048;
  double lr = 3e-4;
  int epochs = 30;
  bool policy_masks = false;  // draw partial inputs from recorded episode grids
  std::uint64_t seed = 0;
  std::uint64_t config_digest = 0;

  int stages() const { return static_cast<int>(channels.size()); }
  int feature_dim() const { return std::accumulate(channels.begin(), channels.end(), 0); }
  int stage_resolution(int k) const { return grid_n >> k; }

  void validate() const {
    if (stages() < 2) throw std::invalid_argument("recon: need at least two pyramid stages");
    if (grid_n < 2) throw std::invalid_argument("recon: bad grid resolution");
    if (stage_resolution(stages() - 1) < 2)
      throw std::invalid_argument("recon: last stage resolution must be >= 2");
    if ((grid_n >> (stages() - 1)) << (stages() - 1) != grid_n)
      throw std::invalid_argument("recon: resolution must halve cleanly per stage");
    if (decoder_hidden.empty()) throw std::invalid_argument("recon: decoder needs hidden layers");
    if (points_per_sample < 2) throw std::invalid_argument("recon: too few query points");
  }
};

// Multi-scale occupancy completion: strided conv pyramid over the partial
// grid, per-point trilinear feature gather, MLP decoder with sigmoid head.
template <typename T>
struct ReconNet {
  ReconConfig cfg;
  std::vector<nn::Conv3dLayer<T>> convs;
  nn::Mlp<T> dec;

  explicit ReconNet(ReconConfig c) : cfg(std::move(c)), dec("dec", decoder_widths(cfg)) {
    cfg.validate();
    convs.reserve(static_cast<std::size_t>(cfg.stages()));
    int cin = 1;
    for (int s = 0; s < cfg.stages(); ++s) {
      const int cout = cfg.channels[static_cast<std::size_t>(s)];
      convs.emplace_back("enc.conv" + std::to_string(s), cin, cout, 3, s == 0 ? 1 : 2, 1);
      cin = cout;
    }
  }

  static std::vector<int> decoder_widths(const ReconConfig& c) {
    std::vector<int> w{c.feature_dim()};
    w.insert(w.end(), c.decoder_hidden.begin(), c.decoder_hidden.end());
    w.push_back(1);
    return w;
  }

  void init(Rng& rng) {
    for (auto& conv : convs) conv.init(rng);
    dec.init(rng, 1.0);
  }

  std::vector<nn::Param<T>*> params() {
    std::vector<nn::Param<T>*> out;
    for (auto& conv : convs) conv.collect(out);
    dec.collect(out);
    return out;
  }

  // x: node over [1,1,n,n,n]. Returns one lattice node [C_k,R_k,R_k,R_k] per stage.
  std::vector<int> encode(nn::Graph<T>& g, int x) {
    if (g.val(x).shape != std::vector<int>{1, 1, cfg.grid_n, cfg.grid_n, cfg.grid_n})
      throw std::invalid_argument("recon encode: input resolution mismatch");
    std::vector<int> stages;
    int cur = x;
    for (int k = 0; k < cfg.stages(); ++k) {
      cur = relu(g, convs[static_cast<std::size_t>(k)].forward(g, cur));
      const int c = cfg.channels[static_cast<std::size_t>(k)];
      const int r = cfg.stage_resolution(k);
      stages.push_back(reshape(g, cur, {c, r, r, r}));
    }
    return stages;
  }

  // pts: [P,3] in [0,1]^3. Returns probabilities [P].
  int query(nn::Graph<T>& g, const std::vector<int>& stages, const nn::Tensor<T>& pts) {
    int f = trilinear(g, stages[0], pts);
    for (std::size_t k = 1; k < stages.size(); ++k)
      f = concat_cols(g, f, trilinear(g, stages[k], pts));
    const int logits = dec.forward(g, f);
    return sigmoid_(g, reshape(g, logits, {pts.dim(0)}));
  }
};

struct TrainingSample {
  VoxelGrid input;                       // masked partial grid
  std::vector<Eigen::Vector3d> points;   // grid-normalized [0,1]^3
  std::vector<std::uint8_t> labels;      // 1 = inside the true solid
  double coverage = 0.0;                 // achieved fraction of occupied cells
};

// Occupancy label of a grid-normalized point against the true solid.
int occupancy_label(const VoxelGrid& gt, const Eigen::Vector3d& unit_pt);

// Partial-input synthesis: union of random surface patches keeping roughly
// `coverage` of the occupied cells (drawn from [0.05, 0.60] when negative),
// plus half-uniform half-near-surface labeled query points.
TrainingSample make_training_sample(const Mesh& mesh, const VoxelGrid& gt, std::uint64_t seed,
                                    int n_points = 2048, double coverage = -1.0);

// Query points and labels only, for an externally supplied partial grid.
TrainingSample make_training_sample_for(const VoxelGrid& input, const Mesh& mesh,
                                        const VoxelGrid& gt, std::uint64_t seed, int n_points);

struct ReconShape {
  const Mesh* mesh = nullptr;
  const VoxelGrid* grid = nullptr;
  const std::vector<VoxelGrid>* partial_inputs = nullptr;  // used when cfg.policy_masks
};

struct ReconTrainResult {
  std::string checkpoint_path;        // best held-out accuracy
  std::string final_checkpoint_path;  // last epoch, regardless of accuracy
  std::string log_path;
  double best_accuracy = 0.0;
  int epochs_run = 0;
};

// BCE training with a fixed held-out point set per evaluation shape. Two
// checkpoints are kept: the best held-out accuracy one and the final state.
ReconTrainResult train_recon(const std::vector<ReconShape>& train_set,
                             const std::vector<ReconShape>& held_out, const ReconConfig& cfg,
                             const std::string& out_dir);

struct Reconstruction {
  Mesh mesh;
  VoxelGrid grid;
};

// Decode an out_resolution^3 lattice of cell centers and extract the 0.5
// isosurface. Empty mesh when the field never crosses the level.
Reconstruction reconstruct(ReconNet<float>& net, const VoxelGrid& x, int out_resolution);

void load_recon_checkpoint(ReconNet<float>& net, const std::string& path,
                           std::uint64_t* digest_out = nullptr);

}  // namespace ts::recon
