#include "tslam/metrics/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "tslam/geom/knn.hpp"
#include "tslam/geom/marching_cubes.hpp"
#include "tslam/geom/surface_sample.hpp"
#include "tslam/geom/voxelize.hpp"
#include "tslam/util/rng.hpp"

namespace ts::metrics {

namespace {

bool has_surface(const Mesh& m) { return !m.faces.empty() && m.total_area() > 0.0; }

double directed_mean_sq(const std::vector<Eigen::Vector3d>& from, const KdTree3& to) {
  double acc = 0.0;
  for (const auto& p : from) {
    const double d = to.nearest(p).distance;
    acc += d * d;
  }
  return acc / static_cast<double>(from.size());
}

}  // namespace

double volumetric_iou(const VoxelGrid& a, const VoxelGrid& b) {
  if (!a.same_layout(b)) throw std::invalid_argument("volumetric_iou: grid layout mismatch");
  std::int64_t inter = 0, uni = 0;
  for (std::int64_t i = 0; i < a.cell_count(); ++i) {
    const bool va = a.get(i), vb = b.get(i);
    inter += va && vb;
    uni += va || vb;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double chamfer_l2_points(const std::vector<Eigen::Vector3d>& a,
                         const std::vector<Eigen::Vector3d>& b) {
  if (a.empty() || b.empty()) return kChamferEmptySentinel;
  const KdTree3 ta(a), tb(b);
  return 0.5 * (directed_mean_sq(a, tb) + directed_mean_sq(b, ta));
}

double chamfer_l2(const Mesh& a, const Mesh& b, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("chamfer_l2: need at least one sample");
  if (!has_surface(a) || !has_surface(b)) return kChamferEmptySentinel;
  const std::uint64_t s = derive_seed(seed, "chamfer-samples");
  return chamfer_l2_points(sample_points(a, n_samples, s), sample_points(b, n_samples, s));
}

double normal_consistency(const Mesh& a, const Mesh& b, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("normal_consistency: need at least one sample");
  if (!has_surface(a) || !has_surface(b)) return 0.0;
  const std::uint64_t s = derive_seed(seed, "nc-samples");
  const auto sa = sample_surface(a, n_samples, s);
  const auto sb = sample_surface(b, n_samples, s);

  auto directed = [](const std::vector<SurfaceSample>& from,
                     const std::vector<SurfaceSample>& to) {
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(to.size());
    for (const auto& t : to) pts.push_back(t.point);
    const KdTree3 tree(std::move(pts));
    double acc = 0.0;
    for (const auto& f : from)
      acc += std::abs(f.normal.dot(to[static_cast<std::size_t>(tree.nearest(f.point).index)].normal));
    return acc / static_cast<double>(from.size());
  };
  const double v = 0.5 * (directed(sa, sb) + directed(sb, sa));
  return std::min(1.0, v);
}

MetricsReport evaluate_run(const VoxelGrid& observed_grid, const Mesh& recon_mesh,
                           const VoxelGrid& gt_grid, const Mesh& gt_mesh,
                           const EvalConfig& cfg) {
  MetricsReport r;
  r.n_samples = cfg.n_samples;
  r.seed = cfg.seed;

  r.grid.iou = volumetric_iou(observed_grid, gt_grid);
  const Mesh blocky = grid_to_blocky_mesh(observed_grid);
  r.grid.chamfer_l2 = chamfer_l2(blocky, gt_mesh, cfg.n_samples, cfg.seed);
  r.grid.normal_consistency = normal_consistency(blocky, gt_mesh, cfg.n_samples, cfg.seed);

  if (cfg.recon_grid) {
    r.recon.iou = volumetric_iou(*cfg.recon_grid, gt_grid);
  } else if (has_surface(recon_mesh)) {
    r.recon.iou = volumetric_iou(voxelize_workspace(recon_mesh, gt_grid.resolution()), gt_grid);
  } else {
    r.recon.iou = volumetric_iou(VoxelGrid(gt_grid.resolution(), gt_grid.bbox_min(),
                                           gt_grid.bbox_max()),
                                 gt_grid);
  }
  r.recon.chamfer_l2 = chamfer_l2(recon_mesh, gt_mesh, cfg.n_samples, cfg.seed);
  r.recon.normal_consistency = normal_consistency(recon_mesh, gt_mesh, cfg.n_samples, cfg.seed);
  return r;
}

std::string csv_header() {
  return "shape_id,policy_tag,poses,iou_grid,iou_recon,chamfer_grid,chamfer_recon,"
         "nc_grid,nc_recon,seed";
}

std::string csv_row(const std::string& shape_id, const std::string& policy_tag,
                    int poses, const MetricsReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << shape_id << ',' << policy_tag << ',' << poses << ',' << r.grid.iou << ','
     << r.recon.iou << ',' << r.grid.chamfer_l2 << ',' << r.recon.chamfer_l2 << ','
     << r.grid.normal_consistency << ',' << r.recon.normal_consistency << ',' << r.seed;
  return os.str();
}

}  // namespace ts::metrics
