#include "tslam/geom/voxel_grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "tslam/util/rng.hpp"

namespace ts {

namespace {

constexpr char kMagic[4] = {'T', 'V', 'O', 'X'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_le(std::ostream& os, T v) {
  // assumes little-endian host, which holds for every supported target
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

VoxelGrid::VoxelGrid(int n, const Eigen::Vector3d& bbox_min,
                     const Eigen::Vector3d& bbox_max)
    : n_(n), bbox_min_(bbox_min), bbox_max_(bbox_max) {
  if (n <= 0) throw std::invalid_argument("VoxelGrid: resolution must be > 0");
  const Eigen::Vector3d ext = bbox_max - bbox_min;
  if (!(ext.x() > 0 && ext.y() > 0 && ext.z() > 0)) {
    throw std::invalid_argument("VoxelGrid: bbox_min must be < bbox_max");
  }
  const double e = ext.x() / n;
  if (std::abs(ext.y() / n - e) > 1e-9 * std::abs(e) ||
      std::abs(ext.z() / n - e) > 1e-9 * std::abs(e)) {
    throw std::invalid_argument("VoxelGrid: cells must be cubical");
  }
  edge_ = e;
  bits_.assign(static_cast<std::size_t>((cell_count() + 7) / 8), 0);
}

VoxelGrid VoxelGrid::workspace(int n) {
  return VoxelGrid(n, Eigen::Vector3d(-0.5, -0.5, -0.5),
                   Eigen::Vector3d(0.5, 0.5, 0.5));
}

bool VoxelGrid::locate(const Eigen::Vector3d& p, int& x, int& y, int& z) const {
  const Eigen::Vector3d rel = (p - bbox_min_) / edge_;
  x = static_cast<int>(std::floor(rel.x()));
  y = static_cast<int>(std::floor(rel.y()));
  z = static_cast<int>(std::floor(rel.z()));
  return in_bounds(x, y, z);
}

std::int64_t VoxelGrid::count_occupied() const {
  std::int64_t total = 0;
  for (std::uint8_t b : bits_) total += std::popcount(b);
  return total;
}

bool VoxelGrid::same_layout(const VoxelGrid& other) const {
  return n_ == other.n_ && (bbox_min_ - other.bbox_min_).norm() < 1e-12 &&
         (bbox_max_ - other.bbox_max_).norm() < 1e-12;
}

bool VoxelGrid::operator==(const VoxelGrid& other) const {
  return same_layout(other) && bits_ == other.bits_;
}

std::uint64_t VoxelGrid::content_digest() const {
  std::uint64_t state = 0x7a6f78ull ^ static_cast<std::uint64_t>(n_);
  auto mix = [&state](std::uint64_t v) {
    state ^= v;
    splitmix64(state);
  };
  for (double d : {bbox_min_.x(), bbox_min_.y(), bbox_min_.z(), bbox_max_.x(),
                   bbox_max_.y(), bbox_max_.z()}) {
    std::uint64_t bitsrep;
    std::memcpy(&bitsrep, &d, sizeof(double));
    mix(bitsrep);
  }
  std::uint64_t acc = 0;
  int shift = 0;
  for (std::uint8_t b : bits_) {
    acc |= static_cast<std::uint64_t>(b) << shift;
    shift += 8;
    if (shift == 64) {
      mix(acc);
      acc = 0;
      shift = 0;
    }
  }
  if (shift) mix(acc);
  std::uint64_t copy = state;
  return splitmix64(copy);
}

void VoxelGrid::save_tvox(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.write(kMagic, 4);
  write_le<std::uint16_t>(os, kVersion);
  write_le<std::uint16_t>(os, static_cast<std::uint16_t>(n_));
  for (double d : {bbox_min_.x(), bbox_min_.y(), bbox_min_.z(), bbox_max_.x(),
                   bbox_max_.y(), bbox_max_.z()}) {
    write_le<double>(os, d);
  }
  os.write(reinterpret_cast<const char*>(bits_.data()),
           static_cast<std::streamsize>(bits_.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

VoxelGrid VoxelGrid::load_tvox(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a TVOX file: " + path);
  }
  const auto version = read_le<std::uint16_t>(is);
  if (version != kVersion) {
    throw std::runtime_error("unsupported TVOX version in " + path);
  }
  const int n = read_le<std::uint16_t>(is);
  Eigen::Vector3d lo, hi;
  for (double* d : {&lo.x(), &lo.y(), &lo.z(), &hi.x(), &hi.y(), &hi.z()}) {
    *d = read_le<double>(is);
  }
  VoxelGrid grid(n, lo, hi);
  is.read(reinterpret_cast<char*>(grid.bits_.data()),
          static_cast<std::streamsize>(grid.bits_.size()));
  if (!is) throw std::runtime_error("truncated TVOX file: " + path);
  return grid;
}

}  // namespace ts
