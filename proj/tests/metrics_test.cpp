#include <sstream>

#include "doctest.h"
#include "test_util.hpp"
#include "tslam/geom/marching_cubes.hpp"
#include "tslam/geom/voxelize.hpp"
#include "tslam/metrics/metrics.hpp"

using namespace ts;
using namespace ts::metrics;

namespace {

VoxelGrid block(int x0, int y0, int z0, int x1, int y1, int z1) {
  VoxelGrid g = VoxelGrid::workspace(8);
  for (int z = z0; z < z1; ++z)
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) g.set(x, y, z, true);
  return g;
}

// Unit quad in the z=h plane, normal +z.
Mesh quad_z(double h) {
  Mesh m;
  m.vertices = {{-0.5, -0.5, h}, {0.5, -0.5, h}, {0.5, 0.5, h}, {-0.5, 0.5, h}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

// Unit quad in the x=h plane, normal +x.
Mesh quad_x(double h) {
  Mesh m;
  m.vertices = {{h, -0.5, -0.5}, {h, 0.5, -0.5}, {h, 0.5, 0.5}, {h, -0.5, 0.5}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace

TEST_CASE("volumetric iou counts voxel overlap") {
  VoxelGrid a = block(0, 0, 0, 2, 2, 2);
  CHECK(volumetric_iou(a, a) == 1.0);

  VoxelGrid far = block(5, 5, 5, 7, 7, 7);
  CHECK(volumetric_iou(a, far) == 0.0);

  VoxelGrid shifted = block(1, 0, 0, 3, 2, 2);
  CHECK(volumetric_iou(a, shifted) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(volumetric_iou(shifted, a) == volumetric_iou(a, shifted));

  VoxelGrid e1 = VoxelGrid::workspace(8), e2 = VoxelGrid::workspace(8);
  CHECK(volumetric_iou(e1, e2) == 1.0);

  VoxelGrid other(8, {0, 0, 0}, {1, 1, 1});
  CHECK_THROWS_AS(volumetric_iou(a, other), std::invalid_argument);
  VoxelGrid coarse = VoxelGrid::workspace(4);
  CHECK_THROWS_AS(volumetric_iou(a, coarse), std::invalid_argument);
}

TEST_CASE("point chamfer matches hand-computed values") {
  std::vector<Eigen::Vector3d> a = {{0, 0, 0}};
  std::vector<Eigen::Vector3d> b = {{0.37, 0, 0}};
  CHECK(chamfer_l2_points(a, a) == 0.0);
  CHECK(chamfer_l2_points(a, b) == doctest::Approx(0.37 * 0.37).epsilon(1e-15));
  CHECK(chamfer_l2_points(a, {}) == kChamferEmptySentinel);
  CHECK(chamfer_l2_points({}, b) == kChamferEmptySentinel);

  // Two pairs: each point's nearest neighbor is the matching one.
  std::vector<Eigen::Vector3d> p = {{0, 0, 0}, {1, 0, 0}};
  std::vector<Eigen::Vector3d> q = {{0, 0.1, 0}, {1, 0, 0.2}};
  const double want = 0.5 * ((0.01 + 0.04) / 2 + (0.01 + 0.04) / 2);
  CHECK(chamfer_l2_points(p, q) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("mesh chamfer: identity, planes, swap, scaling") {
  Mesh sphere = ttest::icosphere(0.22, 3);
  CHECK(chamfer_l2(sphere, sphere, 2000, 5) == 0.0);

  const double t = 0.1;
  Mesh a = quad_z(0.0), b = quad_z(t);
  const double planes = chamfer_l2(a, b, 10000, 7);
  CHECK(planes == doctest::Approx(t * t).epsilon(0.05));
  CHECK(chamfer_l2(b, a, 10000, 7) == planes);

  Mesh box = ttest::make_box({-0.3, -0.2, -0.25}, {0.3, 0.2, 0.25});
  const double base = chamfer_l2(sphere, box, 20000, 11);
  CHECK(chamfer_l2(box, sphere, 20000, 11) == base);

  const double s = 2.0;
  Mesh sphere2 = sphere, box2 = box;
  sphere2.transform(s * Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
  box2.transform(s * Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
  const double scaled = chamfer_l2(sphere2, box2, 20000, 11);
  CHECK(scaled == doctest::Approx(s * s * base).epsilon(0.02));

  Mesh empty;
  CHECK(chamfer_l2(empty, box, 100, 0) == kChamferEmptySentinel);
  CHECK(chamfer_l2(box, empty, 100, 0) == kChamferEmptySentinel);
}

TEST_CASE("normal consistency: identity, parallel, orthogonal, rotation") {
  Mesh sphere = ttest::icosphere(0.25, 3);
  CHECK(normal_consistency(sphere, sphere, 5000, 3) == doctest::Approx(1.0).epsilon(1e-6));

  CHECK(normal_consistency(quad_z(0.0), quad_z(0.2), 5000, 3) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(normal_consistency(quad_z(0.0), quad_x(0.0), 5000, 3) ==
        doctest::Approx(0.0).epsilon(1e-3));

  Mesh box = ttest::make_box({-0.3, -0.2, -0.25}, {0.3, 0.2, 0.25});
  const double base = normal_consistency(sphere, box, 10000, 13);
  CHECK(base > 0.0);
  CHECK(base < 1.0);
  CHECK(normal_consistency(box, sphere, 10000, 13) == base);

  Eigen::Matrix3d rot(Eigen::AngleAxisd(0.83, Eigen::Vector3d(1, 2, -1).normalized()));
  Mesh sr = sphere, br = box;
  sr.transform(rot, Eigen::Vector3d::Zero());
  br.transform(rot, Eigen::Vector3d::Zero());
  CHECK(normal_consistency(sr, br, 10000, 13) == doctest::Approx(base).epsilon(1e-3));

  Mesh empty;
  CHECK(normal_consistency(empty, box, 100, 0) == 0.0);
}

TEST_CASE("evaluate_run against itself is perfect") {
  Mesh box = ttest::make_box({-0.28, -0.18, -0.22}, {0.28, 0.18, 0.22});
  VoxelGrid gt = voxelize_workspace(box, 32);

  EvalConfig cfg;
  cfg.n_samples = 4000;
  cfg.seed = 17;
  MetricsReport r = evaluate_run(gt, box, gt, box, cfg);
  CHECK(r.grid.iou == 1.0);
  CHECK(r.recon.iou == 1.0);
  CHECK(r.recon.chamfer_l2 == 0.0);
  CHECK(r.recon.normal_consistency == doctest::Approx(1.0).epsilon(1e-6));
  // The blocky grid boundary hugs the true surface to within a cell edge.
  CHECK(r.grid.chamfer_l2 < VoxelGrid::workspace(32).edge() * VoxelGrid::workspace(32).edge());
  CHECK(r.grid.normal_consistency > 0.8);

  MetricsReport again = evaluate_run(gt, box, gt, box, cfg);
  CHECK(again.grid.chamfer_l2 == r.grid.chamfer_l2);
  CHECK(again.recon.normal_consistency == r.recon.normal_consistency);
}

TEST_CASE("evaluate_run punishes an empty prediction") {
  Mesh box = ttest::make_box({-0.25, -0.25, -0.2}, {0.25, 0.25, 0.2});
  VoxelGrid gt = voxelize_workspace(box, 32);
  VoxelGrid nothing = VoxelGrid::workspace(32);

  MetricsReport r = evaluate_run(nothing, Mesh{}, gt, box, {2000, 0, nullptr});
  CHECK(r.grid.iou == 0.0);
  CHECK(r.recon.iou == 0.0);
  CHECK(r.grid.chamfer_l2 == kChamferEmptySentinel);
  CHECK(r.recon.chamfer_l2 == kChamferEmptySentinel);
  CHECK(r.recon.normal_consistency == 0.0);
}

TEST_CASE("evaluate_run can take an explicit reconstruction grid") {
  Mesh box = ttest::make_box({-0.25, -0.25, -0.2}, {0.25, 0.25, 0.2});
  VoxelGrid gt = voxelize_workspace(box, 32);

  EvalConfig cfg;
  cfg.n_samples = 1000;
  cfg.recon_grid = &gt;
  MetricsReport r = evaluate_run(VoxelGrid::workspace(32), Mesh{}, gt, box, cfg);
  CHECK(r.recon.iou == 1.0);
  CHECK(r.grid.iou == 0.0);
}

TEST_CASE("csv rows carry every report column") {
  CHECK(csv_header() ==
        "shape_id,policy_tag,poses,iou_grid,iou_recon,chamfer_grid,chamfer_recon,"
        "nc_grid,nc_recon,seed");
  MetricsReport r;
  r.grid = {0.5, 0.01, 0.9};
  r.recon = {0.75, 0.002, 0.95};
  r.seed = 42;
  const std::string row = csv_row("shape_003", "tslam", 4, r);
  std::istringstream is(row);
  std::string field;
  int count = 0;
  while (std::getline(is, field, ',')) ++count;
  CHECK(count == 10);
  CHECK(row.substr(0, 21) == "shape_003,tslam,4,0.5");
}
