#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "test_util.hpp"
#include "tslam/geom/hull.hpp"
#include "tslam/geom/knn.hpp"
#include "tslam/geom/marching_cubes.hpp"
#include "tslam/geom/mesh.hpp"
#include "tslam/geom/mesh_io.hpp"
#include "tslam/geom/surface_sample.hpp"
#include "tslam/geom/voxel_grid.hpp"
#include "tslam/geom/voxelize.hpp"
#include "tslam/util/rng.hpp"

using ttest::icosphere;
using ttest::make_box;

TEST_CASE("off loader reads a minimal one-triangle file") {
  std::istringstream in(
      "OFF\n"
      "3 1 0\n"
      "0 0 0\n"
      "1 0 0\n"
      "0 1 0\n"
      "3 0 1 2\n");
  ts::Mesh m = ts::parse_off(in, "tri.off");
  CHECK(m.vertices.size() == 3);
  CHECK(m.faces.size() == 1);
  CHECK(!m.non_manifold_warning);
}

TEST_CASE("obj loader fan-triangulates a quad cube") {
  std::ostringstream obj;
  obj << "v -0.5 -0.5 -0.5\nv 0.5 -0.5 -0.5\nv 0.5 0.5 -0.5\nv -0.5 0.5 -0.5\n"
      << "v -0.5 -0.5 0.5\nv 0.5 -0.5 0.5\nv 0.5 0.5 0.5\nv -0.5 0.5 0.5\n"
      << "f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\nf 2 3 7 6\nf 3 4 8 7\nf 4 1 5 8\n";
  std::istringstream in(obj.str());
  ts::Mesh m = ts::parse_obj(in, "cube.obj");
  CHECK(m.vertices.size() == 8);
  CHECK(m.faces.size() == 12);
}

TEST_CASE("loader rejects out-of-range face indices with a line number") {
  std::ostringstream off;
  off << "OFF\n8 1 0\n";
  for (int i = 0; i < 8; ++i) off << i << " 0 0\n";
  off << "3 0 1 99\n";
  std::istringstream in(off.str());
  try {
    ts::parse_off(in, "bad.off");
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("bad.off:") != std::string::npos);
    CHECK(what.find("99") != std::string::npos);
    CHECK(what.find("out of range") != std::string::npos);
  }
}

TEST_CASE("load_mesh round-trips through save_obj") {
  ts::Mesh box = make_box({-0.2, -0.3, -0.1}, {0.4, 0.1, 0.5});
  auto path = (ttest::scratch_dir() / "roundtrip.obj").string();
  ts::save_obj(box, path);
  ts::Mesh back = ts::load_mesh(path);
  REQUIRE(back.vertices.size() == box.vertices.size());
  REQUIRE(back.faces.size() == box.faces.size());
  for (std::size_t i = 0; i < box.vertices.size(); ++i) {
    CHECK((back.vertices[i] - box.vertices[i]).norm() < 1e-9);
  }
  std::remove(path.c_str());
}

TEST_CASE("workspace normalization hits the target bounding-box volume") {
  SUBCASE("irregular mesh at scale 8") {
    ts::Mesh m = make_box({1.0, 2.0, 3.0}, {3.0, 5.0, 4.0});
    ts::Mesh out = ts::normalize_to_workspace(m, 8.0);
    Eigen::Vector3d lo, hi;
    out.bounding_box(lo, hi);
    CHECK(((lo + hi) / 2).norm() < 1e-12);
    const Eigen::Vector3d ext = hi - lo;
    CHECK(ext.prod() == doctest::Approx(1.0 / 8.0).epsilon(1e-9));
  }
  SUBCASE("cube-shaped object at scale 8 has max extent 0.5") {
    ts::Mesh m = make_box({-1, -1, -1}, {1, 1, 1});
    ts::Mesh out = ts::normalize_to_workspace(m, 8.0);
    Eigen::Vector3d lo, hi;
    out.bounding_box(lo, hi);
    CHECK((hi - lo).maxCoeff() == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("centered unit cube at scale 1 is the identity") {
    ts::Mesh m = make_box({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5});
    ts::Mesh out = ts::normalize_to_workspace(m, 1.0);
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
      CHECK((out.vertices[i] - m.vertices[i]).norm() < 1e-12);
    }
  }
  SUBCASE("zero-thickness plane is rejected") {
    ts::Mesh flat;
    flat.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
    flat.faces = {{0, 1, 2}, {1, 3, 2}};
    CHECK_THROWS_AS(ts::normalize_to_workspace(flat, 8.0), std::exception);
  }
}

TEST_CASE("solid voxelization of a sphere matches the analytic inside test") {
  // facet sagitta at this subdivision is ~3e-4, well below the smallest
  // gap between any cell-center radius and 0.4 (~1.1e-3 at N=32), so the
  // polyhedral approximation cannot flip any cell
  ts::Mesh sphere = icosphere(0.4, 4);
  ts::VoxelizeStats stats;
  ts::VoxelGrid grid = ts::voxelize_workspace(sphere, 32, &stats);
  CHECK(stats.watertight());

  std::int64_t mismatches = 0;
  for (int z = 0; z < 32; ++z) {
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        const bool inside = grid.cell_center(x, y, z).norm() < 0.4;
        if (inside != grid.get(x, y, z)) ++mismatches;
      }
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("solid voxelization of the lower half-box occupies 32*32*16 cells") {
  ts::Mesh half = make_box({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.0});
  ts::VoxelGrid grid = ts::voxelize_workspace(half, 32);
  CHECK(grid.count_occupied() == 32 * 32 * 16);
  // boundary convention: exactly the cells with center below z = 0
  for (int z = 0; z < 32; ++z) {
    const bool expect = grid.cell_center(0, 0, z).z() < 0.0;
    CHECK(grid.get(5, 7, z) == expect);
  }
}

TEST_CASE("mesh outside the box voxelizes to an empty grid") {
  ts::Mesh far_box = make_box({9.5, -0.5, -0.5}, {10.5, 0.5, 0.5});
  ts::VoxelGrid grid = ts::voxelize_workspace(far_box, 32);
  CHECK(grid.count_occupied() == 0);
}

TEST_CASE("voxelization is deterministic and monotone under dilation") {
  ts::Mesh small = icosphere(0.3, 3);
  ts::Mesh big = icosphere(0.34, 3);

  ts::VoxelGrid a = ts::voxelize_workspace(small, 32);
  ts::VoxelGrid b = ts::voxelize_workspace(small, 32);
  CHECK(a == b);

  ts::VoxelGrid grown = ts::voxelize_workspace(big, 32);
  for (std::int64_t i = 0; i < a.cell_count(); ++i) {
    if (a.get(i)) CHECK(grown.get(i));
  }
  CHECK(grown.count_occupied() > a.count_occupied());
}

TEST_CASE("surface sampling stays on the mesh and respects areas") {
  SUBCASE("single triangle contains every sample") {
    ts::Mesh tri;
    tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    tri.faces = {{0, 1, 2}};
    auto samples = ts::sample_surface(tri, 1000, 7);
    REQUIRE(samples.size() == 1000);
    for (const auto& s : samples) {
      CHECK(s.face == 0);
      CHECK(std::abs(s.point.z()) < 1e-12);
      CHECK(s.point.x() >= -1e-12);
      CHECK(s.point.y() >= -1e-12);
      CHECK(s.point.x() + s.point.y() <= 1.0 + 1e-12);
      CHECK(std::abs(s.normal.norm() - 1.0) < 1e-6);
    }
  }
  SUBCASE("two triangles with area ratio 3:1 split samples 3:1") {
    ts::Mesh m;
    m.vertices = {{0, 0, 0}, {3, 0, 0}, {0, 2, 0},
                  {10, 0, 0}, {11, 0, 0}, {10, 2, 0}};
    m.faces = {{0, 1, 2}, {3, 4, 5}};  // areas 3 and 1
    auto samples = ts::sample_surface(m, 100000, 11);
    int big = 0;
    for (const auto& s : samples) big += s.face == 0 ? 1 : 0;
    CHECK(big > 74250);
    CHECK(big < 75750);
  }
  SUBCASE("same seed reproduces the sample list") {
    ts::Mesh sphere = icosphere(0.4, 2);
    auto s1 = ts::sample_surface(sphere, 500, 1234);
    auto s2 = ts::sample_surface(sphere, 500, 1234);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
      CHECK(s1[i].point == s2[i].point);
      CHECK(s1[i].face == s2[i].face);
    }
  }
  SUBCASE("empty mesh is rejected") {
    ts::Mesh empty;
    CHECK_THROWS_AS(ts::sample_surface(empty, 10, 1), std::exception);
  }
}

TEST_CASE("marching cubes on a sphere distance field") {
  // nodes over [-0.5, 0.5]^3, spacing 1/32
  ts::ScalarField f = ts::ScalarField::allocate(
      33, 33, 33, Eigen::Vector3d(-0.5, -0.5, -0.5),
      Eigen::Vector3d::Constant(1.0 / 32.0));
  for (int z = 0; z < 33; ++z)
    for (int y = 0; y < 33; ++y)
      for (int x = 0; x < 33; ++x)
        f.at(x, y, z) = f.node(x, y, z).norm() - 0.3;

  ts::Mesh m = ts::marching_cubes(f, 0.0);
  REQUIRE(!m.empty());
  double worst = 0.0;
  for (const auto& v : m.vertices) {
    worst = std::max(worst, std::abs(v.norm() - 0.3));
  }
  CHECK(worst < 1.0 / 32.0);

  auto rep = ttest::check_closed(m);
  CHECK(rep.closed_oriented);
  CHECK(rep.euler() == 2);
}

TEST_CASE("marching cubes on a torus distance field has genus one") {
  const double R = 0.3, r = 0.12;
  ts::ScalarField f = ts::ScalarField::allocate(
      65, 65, 65, Eigen::Vector3d(-0.5, -0.5, -0.5),
      Eigen::Vector3d::Constant(1.0 / 64.0));
  for (int z = 0; z < 65; ++z)
    for (int y = 0; y < 65; ++y)
      for (int x = 0; x < 65; ++x) {
        const Eigen::Vector3d p = f.node(x, y, z);
        const double ring = std::hypot(p.x(), p.y()) - R;
        f.at(x, y, z) = std::hypot(ring, p.z()) - r;
      }
  ts::Mesh m = ts::marching_cubes(f, 0.0);
  REQUIRE(!m.empty());
  auto rep = ttest::check_closed(m);
  CHECK(rep.closed_oriented);
  CHECK(rep.euler() == 0);
}

TEST_CASE("marching cubes edge cases") {
  SUBCASE("constant field yields an empty mesh") {
    ts::ScalarField f = ts::ScalarField::allocate(
        8, 8, 8, Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
    ts::Mesh m = ts::marching_cubes(f, 0.5);
    CHECK(m.empty());
  }
  SUBCASE("single hot node yields a closed polyhedron") {
    ts::ScalarField f = ts::ScalarField::allocate(
        5, 5, 5, Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
    f.at(2, 2, 2) = 1.0;
    ts::Mesh m = ts::marching_cubes(f, 0.5);
    CHECK(m.faces.size() == 8);
    auto rep = ttest::check_closed(m);
    CHECK(rep.closed_oriented);
    CHECK(rep.euler() == 2);
  }
}

TEST_CASE("marching cubes of a voxelized sphere reproduces the grid") {
  ts::Mesh sphere = icosphere(0.4, 4);
  ts::VoxelGrid grid = ts::voxelize_workspace(sphere, 32);
  ts::Mesh surf = ts::marching_cubes(ts::field_from_grid(grid), 0.5);
  REQUIRE(!surf.empty());
  ts::VoxelGrid back = ts::voxelize_workspace(surf, 32);

  std::int64_t differing = 0;
  for (std::int64_t i = 0; i < grid.cell_count(); ++i) {
    if (grid.get(i) != back.get(i)) ++differing;
  }
  CHECK(differing < 0.03 * static_cast<double>(grid.count_occupied()));
}

TEST_CASE("blocky grid meshes are closed, outward and volume-exact") {
  ts::VoxelGrid grid = ts::VoxelGrid::workspace(4);
  const double h = grid.edge();

  SUBCASE("single cell") {
    grid.set(1, 1, 1, true);
    ts::Mesh m = ts::grid_to_blocky_mesh(grid);
    CHECK(m.faces.size() == 12);
    auto rep = ttest::check_closed(m);
    CHECK(rep.closed_oriented);
    CHECK(rep.euler() == 2);
    CHECK(ttest::signed_volume(m) == doctest::Approx(h * h * h).epsilon(1e-12));
  }
  SUBCASE("two adjacent cells merge into one box") {
    grid.set(1, 1, 1, true);
    grid.set(2, 1, 1, true);
    ts::Mesh m = ts::grid_to_blocky_mesh(grid);
    CHECK(m.faces.size() == 20);
    auto rep = ttest::check_closed(m);
    CHECK(rep.closed_oriented);
    CHECK(ttest::signed_volume(m) ==
          doctest::Approx(2 * h * h * h).epsilon(1e-12));
  }
  SUBCASE("empty grid yields empty mesh") {
    ts::Mesh m = ts::grid_to_blocky_mesh(grid);
    CHECK(m.empty());
  }
}

TEST_CASE("voxel grid file format round trip and exact byte layout") {
  ts::VoxelGrid g(2, Eigen::Vector3d(-0.5, -0.25, 0.0),
                  Eigen::Vector3d(0.5, 0.75, 1.0));
  g.set(1, 0, 0, true);  // linear index 1
  g.set(0, 1, 1, true);  // linear index 6

  auto path = (ttest::scratch_dir() / "grid.tvox").string();
  g.save_tvox(path);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 4 + 2 + 2 + 48 + 1);
  CHECK(bytes.substr(0, 4) == "TVOX");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);  // version lo
  CHECK(static_cast<unsigned char>(bytes[5]) == 0);  // version hi
  CHECK(static_cast<unsigned char>(bytes[6]) == 2);  // N lo
  CHECK(static_cast<unsigned char>(bytes[7]) == 0);  // N hi
  // bits 1 and 6 set, LSB-first: 0b01000010
  CHECK(static_cast<unsigned char>(bytes[56]) == 0x42);

  ts::VoxelGrid back = ts::VoxelGrid::load_tvox(path);
  CHECK(back == g);
  CHECK(back.bbox_min() == g.bbox_min());
  CHECK(back.bbox_max() == g.bbox_max());
  CHECK(back.content_digest() == g.content_digest());
  std::remove(path.c_str());
}

TEST_CASE("voxel grid rejects non-cubical cells") {
  CHECK_THROWS_AS(ts::VoxelGrid(8, Eigen::Vector3d(0, 0, 0),
                                Eigen::Vector3d(1.0, 2.0, 1.0)),
                  std::exception);
}

TEST_CASE("nearest neighbor queries match the brute-force scan") {
  SUBCASE("query equals reference") {
    std::vector<Eigen::Vector3d> pts;
    ts::Rng rng(42);
    for (int i = 0; i < 64; ++i) {
      double x, y, z;
      rng.unit_sphere(x, y, z);
      pts.emplace_back(x, y, z);
    }
    auto hits = ts::nearest_neighbors(pts, pts, 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(hits[i][0].distance == 0.0);
      CHECK(hits[i][0].index == static_cast<int>(i));
    }
  }
  SUBCASE("random instances up to 500 points") {
    ts::Rng rng(7);
    for (int trial = 0; trial < 6; ++trial) {
      const int n = 50 + trial * 90;
      const int m = 40 + trial * 70;
      std::vector<Eigen::Vector3d> ref, query;
      for (int i = 0; i < n; ++i)
        ref.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1),
                         rng.uniform(-1, 1));
      for (int i = 0; i < m; ++i)
        query.emplace_back(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                           rng.uniform(-1.5, 1.5));
      const int k = 1 + trial;
      auto fast = ts::nearest_neighbors(query, ref, k);
      auto slow = ttest::brute_knn(query, ref, k);
      REQUIRE(fast.size() == slow.size());
      for (std::size_t q = 0; q < fast.size(); ++q) {
        REQUIRE(fast[q].size() == slow[q].size());
        for (std::size_t j = 0; j < fast[q].size(); ++j) {
          CHECK(fast[q][j].index == slow[q][j].index);
          CHECK(fast[q][j].distance == slow[q][j].distance);
        }
      }
    }
  }
  SUBCASE("hand-computed three-point reference") {
    std::vector<Eigen::Vector3d> ref = {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}};
    std::vector<Eigen::Vector3d> query = {{3, 0, 0}};
    auto hits = ts::nearest_neighbors(query, ref, 3);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0][0].index == 1);
    CHECK(hits[0][0].distance == doctest::Approx(2.0));
    CHECK(hits[0][1].index == 0);
    CHECK(hits[0][1].distance == doctest::Approx(3.0));
    CHECK(hits[0][2].index == 2);
    CHECK(hits[0][2].distance == doctest::Approx(std::sqrt(13.0)));
  }
  SUBCASE("k larger than the reference is rejected") {
    std::vector<Eigen::Vector3d> ref = {{0, 0, 0}};
    CHECK_THROWS_AS(ts::nearest_neighbors(ref, ref, 2), std::exception);
    CHECK_THROWS_AS(ts::nearest_neighbors(ref, {}, 1), std::exception);
  }
}

TEST_CASE("duplicate edges in a mesh set the non-manifold warning") {
  // three faces sharing one edge
  std::ostringstream off;
  off << "OFF\n5 3 0\n"
      << "0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 -1 0\n"
      << "3 0 1 2\n3 0 1 3\n3 0 1 4\n";
  std::istringstream in(off.str());
  ts::Mesh m = ts::parse_off(in, "fan.off");
  CHECK(m.non_manifold_warning);
}

TEST_CASE("convex hull of a cube with interior noise is the cube") {
  std::vector<Eigen::Vector3d> pts;
  for (int z = 0; z <= 1; ++z)
    for (int y = 0; y <= 1; ++y)
      for (int x = 0; x <= 1; ++x) pts.emplace_back(x, y, z);
  ts::Rng rng(77);
  for (int i = 0; i < 50; ++i)
    pts.emplace_back(0.1 + 0.8 * rng.uniform(), 0.1 + 0.8 * rng.uniform(),
                     0.1 + 0.8 * rng.uniform());

  ts::Mesh hull = ts::convex_hull(pts);
  CHECK(hull.vertices.size() == 8);
  CHECK(hull.faces.size() == 12);
  CHECK(ttest::signed_volume(hull) == doctest::Approx(1.0).epsilon(1e-12));
  auto report = ttest::check_closed(hull);
  CHECK(report.closed_oriented);
}

TEST_CASE("convex hull ignores interior points exactly") {
  std::vector<Eigen::Vector3d> tetra = {
      {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  ts::Mesh a = ts::convex_hull(tetra);
  std::vector<Eigen::Vector3d> with_inner = tetra;
  with_inner.emplace_back(0.2, 0.2, 0.2);
  ts::Mesh b = ts::convex_hull(with_inner);
  REQUIRE(a.faces.size() == 4);
  REQUIRE(b.faces.size() == 4);
  CHECK(a.vertices == b.vertices);
  CHECK(a.faces == b.faces);
  CHECK(ttest::signed_volume(a) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("convex hull contains every input point") {
  ts::Rng rng(123);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 400; ++i) {
    double x, y, z;
    rng.unit_sphere(x, y, z);
    const double r = 0.05 + 0.4 * rng.uniform();
    pts.emplace_back(r * x, r * y, r * z);
  }
  ts::Mesh hull = ts::convex_hull(pts);
  REQUIRE_FALSE(hull.empty());
  auto report = ttest::check_closed(hull);
  CHECK(report.closed_oriented);
  CHECK(ttest::signed_volume(hull) > 0.0);
  for (const auto& p : pts)
    for (std::size_t f = 0; f < hull.faces.size(); ++f) {
      const Eigen::Vector3d n = hull.face_normal(static_cast<int>(f));
      const Eigen::Vector3d v0 = hull.vertices[static_cast<std::size_t>(hull.faces[f][0])];
      REQUIRE(n.dot(p - v0) <= 1e-8);
    }
}

TEST_CASE("degenerate clouds have no hull") {
  CHECK(ts::convex_hull({}).empty());
  CHECK(ts::convex_hull({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}).empty());
  // collinear
  CHECK(ts::convex_hull({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}}).empty());
  // coplanar
  CHECK(ts::convex_hull({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.3, 0.4, 0}}).empty());
}

TEST_CASE("alpha shape filters large faces and falls back to the hull") {
  // Long thin tetrahedron: three nearby base points plus a far apex.
  std::vector<Eigen::Vector3d> pts = {
      {0, 0, 0}, {1e-3, 0, 0}, {0, 1e-3, 0}, {0.5, 0.5, 1.0}};
  ts::Mesh hull = ts::convex_hull(pts);
  REQUIRE(hull.faces.size() == 4);

  // Keep only faces with circumradius below 0.1: just the tiny base.
  ts::Mesh tight = ts::alpha_shape_mesh(pts, 10.0);
  CHECK(tight.faces.size() == 1);

  // Impossible filter keeps the full hull as a fallback.
  ts::Mesh fallback = ts::alpha_shape_mesh(pts, 1e9);
  CHECK(fallback.faces.size() == 4);

  // alpha <= 0 disables filtering.
  ts::Mesh off = ts::alpha_shape_mesh(pts, 0.0);
  CHECK(off.faces.size() == 4);
}
