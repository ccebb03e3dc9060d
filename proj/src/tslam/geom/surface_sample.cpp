#include "tslam/geom/surface_sample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ts {

std::vector<SurfaceSample> sample_surface(const Mesh& mesh, int count,
                                          std::uint64_t seed) {
  if (mesh.empty()) throw std::invalid_argument("sample_surface: empty mesh");
  if (count < 1) throw std::invalid_argument("sample_surface: count < 1");

  const int nf = static_cast<int>(mesh.faces.size());
  std::vector<double> cumulative(nf);
  double acc = 0.0;
  for (int f = 0; f < nf; ++f) {
    acc += mesh.face_area(f);
    cumulative[f] = acc;
  }
  if (!(acc > 0.0)) {
    throw std::invalid_argument("sample_surface: zero total area");
  }

  Rng rng(seed);
  std::vector<SurfaceSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double pick = rng.uniform() * acc;
    const int f = static_cast<int>(
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) -
        cumulative.begin());
    const auto& tri = mesh.faces[std::min(f, nf - 1)];
    // square-root trick gives uniform barycentric coordinates
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const double w0 = 1.0 - r1;
    const double w1 = r1 * (1.0 - r2);
    const double w2 = r1 * r2;
    SurfaceSample s;
    s.point = w0 * mesh.vertices[tri[0]] + w1 * mesh.vertices[tri[1]] +
              w2 * mesh.vertices[tri[2]];
    s.face = std::min(f, nf - 1);
    s.normal = mesh.face_normal(s.face);
    out.push_back(s);
  }
  return out;
}

std::vector<Eigen::Vector3d> sample_points(const Mesh& mesh, int count,
                                           std::uint64_t seed) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (const auto& s : sample_surface(mesh, count, seed)) pts.push_back(s.point);
  return pts;
}

}  // namespace ts
