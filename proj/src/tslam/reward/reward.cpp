#include "tslam/reward/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tslam/geom/hull.hpp"
#include "tslam/geom/knn.hpp"
#include "tslam/metrics/metrics.hpp"

namespace ts::reward {

Variant parse_variant(const std::string& tag) {
  if (tag == "discovery+coverage") return Variant::kDiscoveryCoverage;
  if (tag == "-coverage") return Variant::kNoCoverage;
  if (tag == "-discovery") return Variant::kNoDiscovery;
  if (tag == "knn") return Variant::kKnn;
  if (tag == "points") return Variant::kPoints;
  if (tag == "contact") return Variant::kContact;
  if (tag == "disagreement") return Variant::kDisagreement;
  if (tag == "chamfer") return Variant::kChamfer;
  throw std::invalid_argument("unknown reward variant: " + tag);
}

std::string variant_tag(Variant v) {
  switch (v) {
    case Variant::kDiscoveryCoverage: return "discovery+coverage";
    case Variant::kNoCoverage: return "-coverage";
    case Variant::kNoDiscovery: return "-discovery";
    case Variant::kKnn: return "knn";
    case Variant::kPoints: return "points";
    case Variant::kContact: return "contact";
    case Variant::kDisagreement: return "disagreement";
    case Variant::kChamfer: return "chamfer";
  }
  throw std::logic_error("variant_tag: bad enum");
}

void RewardConfig::validate() const {
  if (lambda < 0) throw std::invalid_argument("reward: lambda must be nonnegative");
  if (k < 1) throw std::invalid_argument("reward: k must be at least 1");
  if (stride < 1) throw std::invalid_argument("reward: stride must be at least 1");
}

int discovery_reward(const std::vector<std::int64_t>& contact_cells,
                     const VoxelGrid& previously_observed) {
  int fresh = 0;
  for (std::int64_t c : contact_cells) fresh += !previously_observed.get(c);
  return fresh;
}

int coverage_reward(const std::vector<std::int64_t>& swept_cells,
                    const VoxelGrid& previously_visited) {
  int fresh = 0;
  for (std::int64_t c : swept_cells) fresh += !previously_visited.get(c);
  return fresh;
}

double combined_reward(int r_d, int r_c, double lambda) {
  if (lambda < 0) throw std::invalid_argument("combined_reward: lambda must be nonnegative");
  return r_d + lambda * r_c;
}

double knn_reward(const std::vector<Eigen::Vector3d>& new_points,
                  const std::vector<Eigen::Vector3d>& accumulated, int k) {
  if (k < 1) throw std::invalid_argument("knn_reward: k must be at least 1");
  if (new_points.empty() || accumulated.empty()) return 0.0;
  const int kk = std::min<int>(k, static_cast<int>(accumulated.size()));
  const KdTree3 tree(accumulated);
  double total = 0.0;
  for (const auto& p : new_points) {
    double acc = 0.0;
    for (const KnnHit& h : tree.query(p, kk)) acc += h.distance;
    total += acc / kk;
  }
  return total / static_cast<double>(new_points.size());
}

int points_reward(const std::vector<Eigen::Vector3d>& new_contact_points,
                  const VoxelGrid& previously_contacted) {
  std::vector<std::int64_t> fresh;
  for (const auto& p : new_contact_points) {
    int x, y, z;
    if (!previously_contacted.locate(p, x, y, z)) continue;
    if (!previously_contacted.get(x, y, z)) fresh.push_back(previously_contacted.index(x, y, z));
  }
  std::sort(fresh.begin(), fresh.end());
  fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
  return static_cast<int>(fresh.size());
}

int contact_reward(bool any_contact) { return any_contact ? 1 : 0; }

double disagreement_reward(const std::vector<Eigen::Vector3d>& points_before,
                           const std::vector<Eigen::Vector3d>& points_after, double alpha,
                           int n_samples, std::uint64_t seed) {
  const Mesh before = alpha_shape_mesh(points_before, alpha);
  const Mesh after = alpha_shape_mesh(points_after, alpha);
  if (before.empty() || after.empty()) return 0.0;
  return metrics::chamfer_l2(before, after, n_samples, seed);
}

double chamfer_reward(const std::vector<Eigen::Vector3d>& accumulated,
                      const std::vector<Eigen::Vector3d>& gt_surface_samples) {
  if (gt_surface_samples.empty())
    throw std::invalid_argument("chamfer_reward: ground-truth samples required");
  if (accumulated.empty()) return 0.0;
  return 1.0 / (1e-4 + metrics::chamfer_l2_points(accumulated, gt_surface_samples));
}

RewardEngine::RewardEngine(RewardConfig cfg, VoxelGrid layout,
                           std::vector<Eigen::Vector3d> gt_surface_samples)
    : cfg_(cfg),
      observed_(layout),
      visited_(std::move(layout)),
      gt_samples_(std::move(gt_surface_samples)) {
  cfg_.validate();
  if (cfg_.variant == Variant::kChamfer && gt_samples_.empty())
    throw std::invalid_argument("reward: chamfer variant needs ground-truth samples");
  begin_episode();
}

void RewardEngine::begin_episode() {
  observed_.clear();
  visited_.clear();
  cloud_.clear();
  snapshot_.clear();
  t_ = 0;
}

StepReward RewardEngine::step(const env::StepInfo& info) {
  StepReward out;
  out.discovery = discovery_reward(info.contact_cells, observed_);
  out.coverage = coverage_reward(info.swept_cells, visited_);

  std::vector<Eigen::Vector3d> new_points;
  new_points.reserve(info.events.size());
  for (const auto& ev : info.events) new_points.push_back(ev.point);

  switch (cfg_.variant) {
    case Variant::kDiscoveryCoverage:
      out.value = combined_reward(out.discovery, out.coverage, cfg_.lambda);
      break;
    case Variant::kNoCoverage:
      out.value = out.discovery;
      break;
    case Variant::kNoDiscovery:
      out.value = cfg_.lambda * out.coverage;
      break;
    case Variant::kKnn:
      out.value = knn_reward(new_points, cloud_, cfg_.k);
      break;
    case Variant::kPoints:
      out.value = points_reward(new_points, observed_);
      break;
    case Variant::kContact:
      out.value = contact_reward(info.contact_any);
      break;
    case Variant::kDisagreement:
      if ((t_ + 1) % cfg_.stride == 0) {
        std::vector<Eigen::Vector3d> now = cloud_;
        now.insert(now.end(), new_points.begin(), new_points.end());
        out.value = disagreement_reward(snapshot_, now, cfg_.alpha);
        snapshot_ = std::move(now);
      }
      break;
    case Variant::kChamfer: {
      std::vector<Eigen::Vector3d> now = cloud_;
      now.insert(now.end(), new_points.begin(), new_points.end());
      out.value = chamfer_reward(now, gt_samples_);
      break;
    }
  }

  for (std::int64_t c : info.contact_cells) observed_.set(c, true);
  for (std::int64_t c : info.swept_cells) visited_.set(c, true);
  cloud_.insert(cloud_.end(), new_points.begin(), new_points.end());
  ++t_;
  return out;
}

}  // namespace ts::reward
