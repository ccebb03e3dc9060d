#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tslam/nn/graph.hpp"
#include "tslam/nn/ops3d.hpp"
#include "tslam/util/rng.hpp"

namespace ts::nn {

template <typename T>
void normal_init(Tensor<T>& t, Rng& rng, double std) {
  for (auto& e : t.v) e = static_cast<T>(rng.normal() * std);
}

// He-style fan-in scaling, the default for ReLU stacks.
template <typename T>
void he_init(Tensor<T>& w, Rng& rng, int fan_in, double gain = std::sqrt(2.0)) {
  normal_init(w, rng, gain / std::sqrt(static_cast<double>(fan_in)));
}

template <typename T>
struct Linear {
  Param<T> w, b;

  Linear() = default;
  Linear(const std::string& name, int in, int out) : w(name + ".w", {out, in}), b(name + ".b", {out}) {}

  void init(Rng& rng, double gain = std::sqrt(2.0)) {
    he_init(w.w, rng, w.w.dim(1), gain);
    b.w.fill(T(0));
  }

  int forward(Graph<T>& g, int x) { return linear(g, x, g.param(w), g.param(b)); }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&w);
    out.push_back(&b);
  }
};

template <typename T>
struct Conv3dLayer {
  Param<T> w, b;
  int stride = 1, pad = 1;

  Conv3dLayer() = default;
  Conv3dLayer(const std::string& name, int cin, int cout, int k, int stride_, int pad_)
      : w(name + ".w", {cout, cin, k, k, k}), b(name + ".b", {cout}), stride(stride_), pad(pad_) {}

  void init(Rng& rng, double gain = std::sqrt(2.0)) {
    const int k = w.w.dim(2);
    he_init(w.w, rng, w.w.dim(1) * k * k * k, gain);
    b.w.fill(T(0));
  }

  int forward(Graph<T>& g, int x) { return conv3d(g, x, g.param(w), g.param(b), stride, pad); }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&w);
    out.push_back(&b);
  }
};

// Fully connected stack with ReLU between layers and a linear final layer.
template <typename T>
struct Mlp {
  std::vector<Linear<T>> layers;

  Mlp() = default;
  Mlp(const std::string& name, const std::vector<int>& widths) {
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
      layers.emplace_back(name + ".fc" + std::to_string(i), widths[i], widths[i + 1]);
  }

  void init(Rng& rng, double head_gain = 1.0) {
    for (std::size_t i = 0; i < layers.size(); ++i)
      layers[i].init(rng, i + 1 < layers.size() ? std::sqrt(2.0) : head_gain);
  }

  int forward(Graph<T>& g, int x) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      x = layers[i].forward(g, x);
      if (i + 1 < layers.size()) x = relu(g, x);
    }
    return x;
  }

  void collect(std::vector<Param<T>*>& out) {
    for (auto& l : layers) l.collect(out);
  }
};

template <typename T>
struct Adam {
  T lr = T(3e-4);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
  long t = 0;

  void step(const std::vector<Param<T>*>& params) {
    ++t;
    const T c1 = T(1) - std::pow(beta1, static_cast<T>(t));
    const T c2 = T(1) - std::pow(beta2, static_cast<T>(t));
    for (Param<T>* p : params) {
      for (std::size_t i = 0; i < p->w.v.size(); ++i) {
        const T g = p->g.v[i];
        p->m.v[i] = beta1 * p->m.v[i] + (T(1) - beta1) * g;
        p->s.v[i] = beta2 * p->s.v[i] + (T(1) - beta2) * g * g;
        const T mhat = p->m.v[i] / c1;
        const T shat = p->s.v[i] / c2;
        p->w.v[i] -= lr * mhat / (std::sqrt(shat) + eps);
      }
    }
  }

  static void zero_grad(const std::vector<Param<T>*>& params) {
    for (Param<T>* p : params) p->zero_grad();
  }
};

}  // namespace ts::nn
