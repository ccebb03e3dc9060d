#include "tslam/recon/recon.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tslam/geom/marching_cubes.hpp"
#include "tslam/geom/surface_sample.hpp"
#include "tslam/nn/checkpoint.hpp"

namespace ts::recon {

namespace {

Eigen::Vector3d to_world(const VoxelGrid& g, const Eigen::Vector3d& unit_pt) {
  return g.bbox_min() + unit_pt.cwiseProduct(g.bbox_max() - g.bbox_min());
}

Eigen::Vector3d to_unit(const VoxelGrid& g, const Eigen::Vector3d& world_pt) {
  return (world_pt - g.bbox_min()).cwiseQuotient(g.bbox_max() - g.bbox_min());
}

nn::Tensor<float> points_tensor(const std::vector<Eigen::Vector3d>& pts) {
  nn::Tensor<float> t({static_cast<int>(pts.size()), 3});
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int a = 0; a < 3; ++a)
      t.v[i * 3 + static_cast<std::size_t>(a)] = static_cast<float>(pts[i][a]);
  return t;
}

nn::Tensor<float> grid_tensor(const VoxelGrid& g) {
  const int n = g.resolution();
  nn::Tensor<float> t({1, 1, n, n, n});
  const std::int64_t cells = static_cast<std::int64_t>(n) * n * n;
  for (std::int64_t i = 0; i < cells; ++i)
    t.v[static_cast<std::size_t>(i)] = g.get(i) ? 1.0f : 0.0f;
  return t;
}

std::string csv_num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

double point_accuracy(const nn::Tensor<float>& probs, const std::vector<std::uint8_t>& labels) {
  int hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = probs.v[i] > 0.5f;
    if (pred == (labels[i] != 0)) ++hit;
  }
  return labels.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(labels.size());
}

}  // namespace

int occupancy_label(const VoxelGrid& gt, const Eigen::Vector3d& unit_pt) {
  int x, y, z;
  if (!gt.locate(to_world(gt, unit_pt), x, y, z)) return 0;
  return gt.get(x, y, z) ? 1 : 0;
}

TrainingSample make_training_sample_for(const VoxelGrid& input, const Mesh& mesh,
                                        const VoxelGrid& gt, std::uint64_t seed, int n_points) {
  TrainingSample s;
  s.input = input;
  const std::int64_t occ = gt.count_occupied();
  s.coverage = occ > 0 ? static_cast<double>(input.count_occupied()) / static_cast<double>(occ)
                       : 0.0;

  Rng rng(derive_seed(seed, "query-points"));
  const int uniform_n = n_points / 2;
  s.points.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < uniform_n; ++i)
    s.points.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());

  const int near_n = n_points - uniform_n;
  const double sigma = 1.5 * gt.edge();
  const std::vector<Eigen::Vector3d> surf =
      sample_points(mesh, near_n, derive_seed(seed, "query-surface"));
  for (int i = 0; i < near_n; ++i) {
    Eigen::Vector3d w = surf.empty() ? to_world(gt, {0.5, 0.5, 0.5})
                                     : surf[static_cast<std::size_t>(i) % surf.size()];
    w += sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    s.points.push_back(to_unit(gt, w));
  }

  s.labels.reserve(s.points.size());
  for (const Eigen::Vector3d& p : s.points)
    s.labels.push_back(static_cast<std::uint8_t>(occupancy_label(gt, p)));
  return s;
}

TrainingSample make_training_sample(const Mesh& mesh, const VoxelGrid& gt, std::uint64_t seed,
                                    int n_points, double coverage) {
  Rng rng(derive_seed(seed, "mask"));
  double want = coverage;
  if (want < 0.0) want = rng.uniform(0.05, 0.60);

  VoxelGrid masked(gt.resolution(), gt.bbox_min(), gt.bbox_max());
  if (want >= 1.0) {
    masked = gt;
  } else if (want > 0.0) {
    const std::int64_t occ = gt.count_occupied();
    const auto target = static_cast<std::int64_t>(std::llround(want * static_cast<double>(occ)));
    const int n = gt.resolution();
    const std::vector<Eigen::Vector3d> patch_centers =
        sample_points(mesh, 4096, derive_seed(seed, "patch-centers"));
    std::int64_t covered = 0;
    for (std::size_t pi = 0; pi < patch_centers.size() && covered < target; ++pi) {
      const Eigen::Vector3d& c = patch_centers[pi];
      const double r = rng.uniform(1.5, 4.5) * gt.edge();
      const Eigen::Vector3d lo = c.array() - r;
      const Eigen::Vector3d hi = c.array() + r;
      int x0, y0, z0, x1, y1, z1;
      gt.locate(lo, x0, y0, z0);
      gt.locate(hi, x1, y1, z1);
      x0 = std::clamp(x0, 0, n - 1); y0 = std::clamp(y0, 0, n - 1); z0 = std::clamp(z0, 0, n - 1);
      x1 = std::clamp(x1, 0, n - 1); y1 = std::clamp(y1, 0, n - 1); z1 = std::clamp(z1, 0, n - 1);
      const double r2 = r * r;
      for (int z = z0; z <= z1; ++z)
        for (int y = y0; y <= y1; ++y)
          for (int x = x0; x <= x1; ++x) {
            if (!gt.get(x, y, z) || masked.get(x, y, z)) continue;
            if ((gt.cell_center(x, y, z) - c).squaredNorm() > r2) continue;
            masked.set(x, y, z, true);
            ++covered;
          }
    }
  }

  TrainingSample s = make_training_sample_for(masked, mesh, gt, seed, n_points);
  return s;
}

ReconTrainResult train_recon(const std::vector<ReconShape>& train_set,
                             const std::vector<ReconShape>& held_out, const ReconConfig& cfg,
                             const std::string& out_dir) {
  cfg.validate();
  if (train_set.empty() || held_out.empty())
    throw std::invalid_argument("train_recon: need non-empty train and held-out sets");
  std::set<std::uint64_t> train_digests;
  for (const ReconShape& sh : train_set) {
    if (!sh.mesh || !sh.grid) throw std::invalid_argument("train_recon: null shape entry");
    if (sh.grid->resolution() != cfg.grid_n)
      throw std::invalid_argument("train_recon: shape resolution mismatch");
    train_digests.insert(sh.grid->content_digest());
  }
  for (const ReconShape& sh : held_out) {
    if (!sh.mesh || !sh.grid) throw std::invalid_argument("train_recon: null shape entry");
    if (train_digests.count(sh.grid->content_digest()))
      throw std::invalid_argument("train_recon: train/held-out shape sets overlap");
  }
  if (cfg.policy_masks)
    for (const ReconShape& sh : train_set)
      if (!sh.partial_inputs || sh.partial_inputs->empty())
        throw std::invalid_argument("train_recon: policy masks requested without episode grids");

  ReconNet<float> net(cfg);
  {
    Rng init(derive_seed(cfg.seed, "recon-init"));
    net.init(init);
  }
  nn::Adam<float> adam;
  adam.lr = static_cast<float>(cfg.lr);
  auto params = net.params();

  std::filesystem::create_directories(out_dir);
  ReconTrainResult res;
  res.checkpoint_path = out_dir + "/recon.trec";
  res.final_checkpoint_path = out_dir + "/recon_final.trec";
  res.log_path = out_dir + "/recon_log.csv";
  auto save = [&](const std::string& path) {
    nn::save_tensor_file(path, "TREC", cfg.config_digest, nn::export_params(params));
  };
  save(res.checkpoint_path);
  save(res.final_checkpoint_path);

  std::ofstream log(res.log_path, std::ios::trunc);
  if (!log) throw std::runtime_error("train_recon: cannot open log " + res.log_path);
  log << "epoch,train_loss,held_accuracy\n";

  // Fixed held-out point sets so per-epoch accuracies are comparable.
  std::vector<TrainingSample> held_samples;
  held_samples.reserve(held_out.size());
  for (std::size_t i = 0; i < held_out.size(); ++i) {
    const ReconShape& sh = held_out[i];
    const std::uint64_t hs = derive_seed(cfg.seed, "held-" + std::to_string(i));
    if (cfg.policy_masks && sh.partial_inputs && !sh.partial_inputs->empty()) {
      held_samples.push_back(make_training_sample_for(
          (*sh.partial_inputs)[0], *sh.mesh, *sh.grid, hs, cfg.points_per_sample));
    } else {
      held_samples.push_back(
          make_training_sample(*sh.mesh, *sh.grid, hs, cfg.points_per_sample));
    }
  }

  auto evaluate_held = [&] {
    double acc = 0.0;
    for (const TrainingSample& s : held_samples) {
      nn::Graph<float> g;
      const int x = g.constant(grid_tensor(s.input));
      const auto stages = net.encode(g, x);
      const int probs = net.query(g, stages, points_tensor(s.points));
      acc += point_accuracy(g.val(probs), s.labels);
    }
    return acc / static_cast<double>(held_samples.size());
  };

  double best = evaluate_held();
  res.best_accuracy = best;

  Rng order_rng(derive_seed(cfg.seed, "epoch-order"));
  Rng pool_rng(derive_seed(cfg.seed, "mask-pool"));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
      const std::size_t si = order[oi];
      const ReconShape& sh = train_set[si];
      const std::uint64_t ss = derive_seed(
          cfg.seed, "sample-" + std::to_string(epoch) + "-" + std::to_string(si));
      TrainingSample sample;
      if (cfg.policy_masks) {
        const auto& pool = *sh.partial_inputs;
        sample = make_training_sample_for(pool[pool_rng.uniform_index(pool.size())], *sh.mesh,
                                          *sh.grid, ss, cfg.points_per_sample);
      } else {
        sample = make_training_sample(*sh.mesh, *sh.grid, ss, cfg.points_per_sample);
      }

      nn::Graph<float> g;
      const int x = g.constant(grid_tensor(sample.input));
      const auto stages = net.encode(g, x);
      const int probs = net.query(g, stages, points_tensor(sample.points));
      nn::Tensor<float> labels({static_cast<int>(sample.labels.size())});
      for (std::size_t i = 0; i < sample.labels.size(); ++i)
        labels.v[i] = sample.labels[i] ? 1.0f : 0.0f;
      const int loss = nn::bce_loss(g, probs, g.constant(std::move(labels)));
      const double lv = static_cast<double>(g.val(loss).v[0]);
      if (!std::isfinite(lv)) {
        std::ostringstream os;
        os << "train_recon: non-finite loss at epoch " << epoch << ", shape " << si;
        throw std::runtime_error(os.str());
      }
      loss_sum += lv;

      nn::Adam<float>::zero_grad(params);
      g.backward(loss);
      adam.step(params);
    }

    const double acc = evaluate_held();
    log << epoch << ',' << csv_num(loss_sum / static_cast<double>(train_set.size())) << ','
        << csv_num(acc) << '\n';
    log.flush();
    if (acc > best) {
      best = acc;
      save(res.checkpoint_path);
    }
    res.best_accuracy = best;
    res.epochs_run = epoch + 1;
  }
  if (cfg.epochs > 0) save(res.final_checkpoint_path);
  return res;
}

Reconstruction reconstruct(ReconNet<float>& net, const VoxelGrid& x, int out_resolution) {
  if (x.resolution() != net.cfg.grid_n)
    throw std::invalid_argument("reconstruct: input resolution mismatch");
  if (out_resolution < 2) throw std::invalid_argument("reconstruct: bad output resolution");

  nn::Graph<float> g;
  const int xid = g.constant(grid_tensor(x));
  const auto stages = net.encode(g, xid);

  Reconstruction out;
  out.grid = VoxelGrid(out_resolution, x.bbox_min(), x.bbox_max());
  const Eigen::Vector3d ext = x.bbox_max() - x.bbox_min();
  const double edge = ext.x() / out_resolution;

  ScalarField field = ScalarField::allocate(
      out_resolution + 2, out_resolution + 2, out_resolution + 2,
      x.bbox_min() - 0.5 * edge * Eigen::Vector3d::Ones(), edge * Eigen::Vector3d::Ones());

  const int chunk = 8192;
  std::vector<Eigen::Vector3d> pts;
  std::vector<std::int64_t> cell_of;
  pts.reserve(chunk);
  cell_of.reserve(chunk);
  const std::int64_t total =
      static_cast<std::int64_t>(out_resolution) * out_resolution * out_resolution;

  auto flush = [&] {
    if (pts.empty()) return;
    const int probs = net.query(g, stages, points_tensor(pts));
    const nn::Tensor<float>& pv = g.val(probs);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::int64_t idx = cell_of[i];
      const int cx = static_cast<int>(idx % out_resolution);
      const int cy = static_cast<int>((idx / out_resolution) % out_resolution);
      const int cz = static_cast<int>(idx / (static_cast<std::int64_t>(out_resolution) *
                                             out_resolution));
      const double p = static_cast<double>(pv.v[i]);
      field.at(cx + 1, cy + 1, cz + 1) = p;
      if (p > 0.5) out.grid.set(cx, cy, cz, true);
    }
    pts.clear();
    cell_of.clear();
  };

  for (std::int64_t idx = 0; idx < total; ++idx) {
    const int cx = static_cast<int>(idx % out_resolution);
    const int cy = static_cast<int>((idx / out_resolution) % out_resolution);
    const int cz =
        static_cast<int>(idx / (static_cast<std::int64_t>(out_resolution) * out_resolution));
    pts.emplace_back((cx + 0.5) / out_resolution, (cy + 0.5) / out_resolution,
                     (cz + 0.5) / out_resolution);
    cell_of.push_back(idx);
    if (static_cast<int>(pts.size()) == chunk) flush();
  }
  flush();

  out.mesh = marching_cubes(field, 0.5);
  return out;
}

void load_recon_checkpoint(ReconNet<float>& net, const std::string& path,
                           std::uint64_t* digest_out) {
  const nn::TensorFile file = nn::load_tensor_file(path, "TREC");
  nn::import_params(file, net.params());
  if (digest_out) *digest_out = file.config_digest;
}

}  // namespace ts::recon
