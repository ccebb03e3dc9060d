#include "tslam/geom/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ts {

namespace {

struct HeapEntry {
  double dist2;
  int index;
  bool operator<(const HeapEntry& o) const {
    return dist2 != o.dist2 ? dist2 < o.dist2 : index < o.index;
  }
};

}  // namespace

KdTree3::KdTree3(std::vector<Eigen::Vector3d> points)
    : points_(std::move(points)) {
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  nodes_.reserve(points_.size());
  if (!points_.empty()) {
    root_ = build(0, static_cast<int>(points_.size()), 0);
  }
}

int KdTree3::build(int begin, int end, int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     if (points_[a][axis] != points_[b][axis]) {
                       return points_[a][axis] < points_[b][axis];
                     }
                     return a < b;
                   });
  Node node;
  node.point = order_[mid];
  node.axis = axis;
  const int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid + 1, end, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree3::search(int node, const Eigen::Vector3d& p, int k,
                     std::vector<KnnHit>& heap) const {
  if (node < 0) return;
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  const Eigen::Vector3d& q = points_[static_cast<std::size_t>(nd.point)];
  const double d2 = (p - q).squaredNorm();

  auto cmp = [](const KnnHit& a, const KnnHit& b) {
    // max-heap on (dist, index): worst candidate at front
    return a.distance != b.distance ? a.distance < b.distance
                                    : a.index < b.index;
  };
  const HeapEntry cand{d2, nd.point};
  if (static_cast<int>(heap.size()) < k) {
    heap.push_back({d2, nd.point});
    std::push_heap(heap.begin(), heap.end(), cmp);
  } else {
    const HeapEntry worst{heap.front().distance, heap.front().index};
    if (cand < worst) {
      std::pop_heap(heap.begin(), heap.end(), cmp);
      heap.back() = {d2, nd.point};
      std::push_heap(heap.begin(), heap.end(), cmp);
    }
  }

  const double diff = p[nd.axis] - q[nd.axis];
  const int near = diff < 0 ? nd.left : nd.right;
  const int far = diff < 0 ? nd.right : nd.left;
  search(near, p, k, heap);
  // descend the far side on exact ties as well, so tie-breaking by index
  // matches the brute-force scan
  if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().distance) {
    search(far, p, k, heap);
  }
}

std::vector<KnnHit> KdTree3::query(const Eigen::Vector3d& p, int k) const {
  if (k < 1 || static_cast<std::size_t>(k) > points_.size()) {
    throw std::invalid_argument("KdTree3::query: k out of range");
  }
  std::vector<KnnHit> heap;
  heap.reserve(static_cast<std::size_t>(k));
  search(root_, p, k, heap);  // heap holds squared distances
  std::sort(heap.begin(), heap.end(), [](const KnnHit& a, const KnnHit& b) {
    return a.distance != b.distance ? a.distance < b.distance
                                    : a.index < b.index;
  });
  for (auto& h : heap) h.distance = std::sqrt(h.distance);
  return heap;
}

std::vector<std::vector<KnnHit>> nearest_neighbors(
    const std::vector<Eigen::Vector3d>& query,
    const std::vector<Eigen::Vector3d>& reference, int k) {
  if (reference.empty()) {
    throw std::invalid_argument("nearest_neighbors: empty reference");
  }
  if (k < 1 || static_cast<std::size_t>(k) > reference.size()) {
    throw std::invalid_argument("nearest_neighbors: k > reference size");
  }
  KdTree3 tree(reference);
  std::vector<std::vector<KnnHit>> out;
  out.reserve(query.size());
  for (const auto& p : query) out.push_back(tree.query(p, k));
  return out;
}

}  // namespace ts
