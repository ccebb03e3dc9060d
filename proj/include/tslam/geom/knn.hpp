#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ts {

struct KnnHit {
  double distance = 0.0;  // Euclidean
  int index = -1;
};

/// Static kd-tree over 3D points. Queries return exact nearest neighbors
/// (identical to a brute-force scan, ties broken by lower index).
class KdTree3 {
 public:
  explicit KdTree3(std::vector<Eigen::Vector3d> points);

  std::size_t size() const { return points_.size(); }

  /// k exact nearest neighbors sorted by (distance, index).
  std::vector<KnnHit> query(const Eigen::Vector3d& p, int k) const;
  KnnHit nearest(const Eigen::Vector3d& p) const { return query(p, 1)[0]; }

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int point = -1;
    int axis = 0;
  };
  int build(int begin, int end, int depth);
  void search(int node, const Eigen::Vector3d& p, int k,
              std::vector<KnnHit>& heap) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

/// Per-query k nearest reference points. Throws when k exceeds the
/// reference size or the reference is empty.
std::vector<std::vector<KnnHit>> nearest_neighbors(
    const std::vector<Eigen::Vector3d>& query,
    const std::vector<Eigen::Vector3d>& reference, int k);

}  // namespace ts
