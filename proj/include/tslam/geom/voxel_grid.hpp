#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ts {

/// Binary N^3 occupancy lattice over a world-frame bounding box with
/// cubical cells. Storage is bit-packed, x-fastest, LSB-first per byte,
/// matching the TVOX file layout byte for byte.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(int n, const Eigen::Vector3d& bbox_min,
            const Eigen::Vector3d& bbox_max);

  /// Unit workspace cube [-0.5, 0.5]^3 at resolution n.
  static VoxelGrid workspace(int n);

  int resolution() const { return n_; }
  const Eigen::Vector3d& bbox_min() const { return bbox_min_; }
  const Eigen::Vector3d& bbox_max() const { return bbox_max_; }
  double edge() const { return edge_; }
  std::int64_t cell_count() const {
    return static_cast<std::int64_t>(n_) * n_ * n_;
  }

  std::int64_t index(int x, int y, int z) const {
    return x + static_cast<std::int64_t>(n_) * (y + static_cast<std::int64_t>(n_) * z);
  }
  void unindex(std::int64_t idx, int& x, int& y, int& z) const {
    x = static_cast<int>(idx % n_);
    y = static_cast<int>((idx / n_) % n_);
    z = static_cast<int>(idx / (static_cast<std::int64_t>(n_) * n_));
  }

  bool get(int x, int y, int z) const { return get(index(x, y, z)); }
  bool get(std::int64_t idx) const {
    return (bits_[static_cast<std::size_t>(idx >> 3)] >> (idx & 7)) & 1u;
  }
  void set(int x, int y, int z, bool v) { set(index(x, y, z), v); }
  void set(std::int64_t idx, bool v) {
    const auto byte = static_cast<std::size_t>(idx >> 3);
    const auto bit = static_cast<unsigned>(idx & 7);
    if (v)
      bits_[byte] |= static_cast<std::uint8_t>(1u << bit);
    else
      bits_[byte] &= static_cast<std::uint8_t>(~(1u << bit));
  }

  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && x < n_ && y >= 0 && y < n_ && z >= 0 && z < n_;
  }

  Eigen::Vector3d cell_center(int x, int y, int z) const {
    return bbox_min_ + edge_ * Eigen::Vector3d(x + 0.5, y + 0.5, z + 0.5);
  }
  /// Cell containing a world point; false when outside the box.
  bool locate(const Eigen::Vector3d& p, int& x, int& y, int& z) const;

  std::int64_t count_occupied() const;
  void clear() { std::fill(bits_.begin(), bits_.end(), 0); }

  bool same_layout(const VoxelGrid& other) const;
  bool operator==(const VoxelGrid& other) const;

  const std::vector<std::uint8_t>& raw_bits() const { return bits_; }
  std::vector<std::uint8_t>& raw_bits() { return bits_; }

  /// Stable content digest (layout + bits), used in corpus manifests.
  std::uint64_t content_digest() const;

  void save_tvox(const std::string& path) const;
  static VoxelGrid load_tvox(const std::string& path);

 private:
  int n_ = 0;
  Eigen::Vector3d bbox_min_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d bbox_max_ = Eigen::Vector3d::Zero();
  double edge_ = 0.0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace ts
