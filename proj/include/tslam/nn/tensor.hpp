#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ts::nn {

// Dense row-major tensor. Volumetric data uses [batch, channel, depth, height, width]
// with width fastest, which matches VoxelGrid's x-fastest packing when width = x.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;

  Tensor() = default;

  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(static_cast<std::size_t>(numel_of(shape)), T(0));
  }

  Tensor(std::vector<int> s, std::vector<T> data) : shape(std::move(s)), v(std::move(data)) {
    if (static_cast<std::size_t>(numel_of(shape)) != v.size())
      throw std::invalid_argument("tensor: shape does not match data size");
  }

  static std::int64_t numel_of(const std::vector<int>& s) {
    if (s.empty()) throw std::invalid_argument("tensor: empty shape");
    std::int64_t n = 1;
    for (int d : s) {
      if (d <= 0) throw std::invalid_argument("tensor: nonpositive dimension");
      n *= d;
    }
    return n;
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(v.size()); }
  int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }
  int ndim() const { return static_cast<int>(shape.size()); }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  void fill(T x) { std::fill(v.begin(), v.end(), x); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  static Tensor zeros_like(const Tensor& o) { return Tensor(o.shape); }
};

}  // namespace ts::nn
