#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "tslam/env/env.hpp"
#include "tslam/geom/surface_sample.hpp"
#include "tslam/geom/voxelize.hpp"
#include "tslam/reward/reward.hpp"
#include "tslam/util/rng.hpp"

using namespace ts;
using namespace ts::reward;

namespace {

VoxelGrid grid_with(std::initializer_list<std::int64_t> cells) {
  VoxelGrid g = VoxelGrid::workspace(8);
  for (std::int64_t c : cells) g.set(c, true);
  return g;
}

}  // namespace

TEST_CASE("variant tags round-trip and reject junk") {
  const char* tags[] = {"discovery+coverage", "-coverage", "-discovery", "knn",
                        "points",             "contact",   "disagreement", "chamfer"};
  for (const char* t : tags) CHECK(variant_tag(parse_variant(t)) == t);
  CHECK_THROWS_AS(parse_variant("coverage"), std::invalid_argument);
  CHECK_THROWS_AS(parse_variant(""), std::invalid_argument);
}

TEST_CASE("reward config validation") {
  RewardConfig c;
  c.validate();
  c.lambda = -0.1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.lambda = 0.1;
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.k = 5;
  c.stride = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("discovery and coverage count fresh cells") {
  VoxelGrid seen = grid_with({3, 4});
  CHECK(discovery_reward({10, 11, 12}, seen) == 3);
  CHECK(discovery_reward({3, 4}, seen) == 0);
  CHECK(discovery_reward({}, seen) == 0);
  CHECK(discovery_reward({3, 10}, seen) == 1);

  VoxelGrid visited = grid_with({0, 1, 2, 3});
  CHECK(coverage_reward({0, 1, 2, 3, 10, 11, 12, 13, 14, 15}, visited) == 6);
  CHECK(coverage_reward({0, 1}, visited) == 0);
}

TEST_CASE("combined reward applies the weight") {
  CHECK(combined_reward(3, 6, 0.1) == doctest::Approx(3.6).epsilon(1e-12));
  CHECK(combined_reward(3, 6, 0.0) == 3.0);
  CHECK(combined_reward(0, 6, 0.1) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK_THROWS_AS(combined_reward(1, 1, -1.0), std::invalid_argument);
}

TEST_CASE("knn reward truncates k and averages distances") {
  std::vector<Eigen::Vector3d> one = {{0, 0, 0}};
  CHECK(knn_reward({{0.37, 0, 0}}, one, 5) == doctest::Approx(0.37).epsilon(1e-12));

  std::vector<Eigen::Vector3d> dupes(6, Eigen::Vector3d(0.1, 0.2, 0.3));
  CHECK(knn_reward({{0.1, 0.2, 0.3}}, dupes, 5) == 0.0);

  std::vector<Eigen::Vector3d> five = {
      {1, 0, 0}, {0, 2, 0}, {0, 0, 3}, {-4, 0, 0}, {0, -5, 0}};
  const double want = (1.0 + 2.0 + 3.0 + 4.0 + 5.0) / 5.0;
  CHECK(knn_reward({{0, 0, 0}}, five, 5) == doctest::Approx(want).epsilon(1e-12));

  CHECK(knn_reward({}, five, 5) == 0.0);
  CHECK(knn_reward({{1, 1, 1}}, {}, 5) == 0.0);

  const Eigen::Vector3d shift(0.21, -0.4, 0.33);
  std::vector<Eigen::Vector3d> new_shifted = {shift};
  std::vector<Eigen::Vector3d> acc_shifted;
  for (const auto& p : five) acc_shifted.push_back(p + shift);
  CHECK(knn_reward(new_shifted, acc_shifted, 5) ==
        doctest::Approx(knn_reward({{0, 0, 0}}, five, 5)).epsilon(1e-12));
}

TEST_CASE("points reward deduplicates at voxel granularity") {
  VoxelGrid empty = VoxelGrid::workspace(32);
  const double e = empty.edge();
  const Eigen::Vector3d base = empty.bbox_min();
  auto center = [&](int x, int y, int z) -> Eigen::Vector3d {
    return base + e * Eigen::Vector3d(x + 0.5, y + 0.5, z + 0.5);
  };

  CHECK(points_reward({center(1, 1, 1), center(2, 2, 2), center(3, 3, 3), center(4, 4, 4)},
                      empty) == 4);
  // two points in the same cell count once
  CHECK(points_reward({center(5, 5, 5), center(5, 5, 5) + Eigen::Vector3d(1e-4, 0, 0)},
                      empty) == 1);
  CHECK(points_reward({}, empty) == 0);
  // previously contacted cells are stale
  VoxelGrid seen = empty;
  seen.set(7, 7, 7, true);
  CHECK(points_reward({center(7, 7, 7)}, seen) == 0);
  // points outside the workspace are ignored
  CHECK(points_reward({{2.0, 2.0, 2.0}}, empty) == 0);
}

TEST_CASE("contact reward is the binary flag") {
  CHECK(contact_reward(true) == 1);
  CHECK(contact_reward(false) == 0);
}

TEST_CASE("disagreement reward reacts to hull growth only") {
  std::vector<Eigen::Vector3d> tetra = {{0, 0, 0}, {0.3, 0, 0}, {0, 0.3, 0}, {0, 0, 0.3}};
  CHECK(disagreement_reward(tetra, tetra, 0.0) == 0.0);

  std::vector<Eigen::Vector3d> inner = tetra;
  inner.emplace_back(0.05, 0.05, 0.05);
  CHECK(disagreement_reward(tetra, inner, 0.0) == 0.0);

  std::vector<Eigen::Vector3d> grown = tetra;
  grown.emplace_back(0.3, 0.3, 0.3);
  CHECK(disagreement_reward(tetra, grown, 0.0) > 0.0);

  CHECK(disagreement_reward({}, tetra, 0.0) == 0.0);
  CHECK(disagreement_reward({}, {}, 0.0) == 0.0);
  CHECK(disagreement_reward(tetra, tetra, 5.0) == 0.0);
}

TEST_CASE("chamfer reward is the bounded inverse distance") {
  std::vector<Eigen::Vector3d> gt = {{0, 0, 0}, {1, 0, 0}};
  CHECK(chamfer_reward(gt, gt) == doctest::Approx(10000.0).epsilon(1e-12));
  CHECK(chamfer_reward({}, gt) == 0.0);

  std::vector<Eigen::Vector3d> shifted = {{0.3, 0, 0}, {1.3, 0, 0}};
  const double chamfer = 0.09;  // nearest pairs all 0.3 apart
  CHECK(chamfer_reward(shifted, gt) == doctest::Approx(1.0 / (1e-4 + chamfer)).epsilon(1e-12));

  CHECK_THROWS_AS(chamfer_reward(gt, {}), std::invalid_argument);
}

TEST_CASE("reward engine conserves discovery and coverage over episodes") {
  Mesh box = ttest::make_box({-0.3, -0.2, -0.25}, {0.3, 0.2, 0.25});
  VoxelGrid g = voxelize_workspace(box, 32);
  env::TactileEnv env(env::ProbeSpec{}, box, g, 4);

  RewardConfig cfg;
  for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
    env.reset(static_cast<int>(seed % 4), seed);
    RewardEngine engine(cfg, VoxelGrid::workspace(32));

    Rng rng(derive_seed(seed, "reward-actions"));
    std::vector<double> a(28);
    double sum_d = 0.0, sum_c = 0.0, sum_r = 0.0;
    for (int t = 0; t < 60; ++t) {
      for (auto& v : a) v = rng.uniform(-1.0, 1.0);
      const env::StepInfo info = env.step(a);
      const StepReward r = engine.step(info);
      CHECK(r.value >= 0.0);
      sum_d += r.discovery;
      sum_c += r.coverage;
      sum_r += r.value;
    }
    CHECK(sum_d == static_cast<double>(env.observed().count_occupied()));
    CHECK(sum_c == static_cast<double>(env.visited().count_occupied()));
    CHECK(engine.observed_count() == env.observed().count_occupied());
    CHECK(engine.visited_count() == env.visited().count_occupied());
    CHECK(sum_r == doctest::Approx(sum_d + cfg.lambda * sum_c).epsilon(1e-9));
  }
}

TEST_CASE("reward engine variants produce their reduced signals") {
  Mesh box = ttest::make_box({-0.3, -0.2, -0.25}, {0.3, 0.2, 0.25});
  VoxelGrid g = voxelize_workspace(box, 32);
  env::TactileEnv env(env::ProbeSpec{}, box, g, 4);

  std::vector<env::StepInfo> episode;
  env.reset(1, 55);
  Rng rng(56);
  std::vector<double> a(28);
  for (int t = 0; t < 50; ++t) {
    for (auto& v : a) v = rng.uniform(-1.0, 1.0);
    episode.push_back(env.step(a));
  }

  auto run = [&](Variant v, std::vector<Eigen::Vector3d> gt = {}) {
    RewardConfig cfg;
    cfg.variant = v;
    RewardEngine engine(cfg, VoxelGrid::workspace(32), std::move(gt));
    double total = 0.0;
    for (const auto& info : episode) total += engine.step(info).value;
    return total;
  };

  const double full = run(Variant::kDiscoveryCoverage);
  const double no_cov = run(Variant::kNoCoverage);
  const double no_disc = run(Variant::kNoDiscovery);
  CHECK(full == doctest::Approx(no_cov + no_disc).epsilon(1e-9));
  CHECK(no_cov == static_cast<double>(env.observed().count_occupied()));

  // Binary contact never exceeds one per step.
  RewardConfig cc;
  cc.variant = Variant::kContact;
  RewardEngine contact_engine(cc, VoxelGrid::workspace(32));
  for (const auto& info : episode) {
    const StepReward r = contact_engine.step(info);
    CHECK((r.value == 0.0 || r.value == 1.0));
    CHECK(r.value == (info.contact_any ? 1.0 : 0.0));
  }

  // Chamfer variant is monotone in information when touching a fixed shape:
  // reward stays bounded by 1/eps and nonnegative.
  const auto gt_samples = sample_points(box, 512, 99);
  const double chamfer_total = run(Variant::kChamfer, gt_samples);
  CHECK(chamfer_total >= 0.0);
  CHECK(chamfer_total <= 10000.0 * episode.size());

  const double knn_total = run(Variant::kKnn);
  CHECK(knn_total >= 0.0);
  const double points_total = run(Variant::kPoints);
  CHECK(points_total == no_cov);  // voxel-deduped contact points equal discovery counting
}

TEST_CASE("reward engine resets cleanly between episodes") {
  RewardConfig cfg;
  RewardEngine engine(cfg, VoxelGrid::workspace(8));

  env::StepInfo info;
  info.swept_cells = {1, 2, 3};
  info.contact_cells = {2, 3};
  StepReward first = engine.step(info);
  CHECK(first.discovery == 2);
  CHECK(first.coverage == 3);

  StepReward repeat = engine.step(info);
  CHECK(repeat.discovery == 0);
  CHECK(repeat.coverage == 0);

  engine.begin_episode();
  StepReward fresh = engine.step(info);
  CHECK(fresh.discovery == 2);
  CHECK(fresh.coverage == 3);
  CHECK(engine.observed_count() == 2);
  CHECK(engine.visited_count() == 3);
}
