#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tslam/nn/tensor.hpp"

namespace ts::nn {

template <typename T>
struct Param {
  std::string name;
  Tensor<T> w;  // value
  Tensor<T> g;  // gradient accumulator
  Tensor<T> m;  // Adam first moment
  Tensor<T> s;  // Adam second moment

  Param() = default;
  Param(std::string n, std::vector<int> shape)
      : name(std::move(n)), w(shape), g(shape), m(shape), s(std::move(shape)) {}

  void zero_grad() { g.fill(T(0)); }
};

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Dynamic reverse-mode tape. Nodes are created in topological order by the op
// functions below, so backward() is a reverse sweep over creation order.
template <typename T>
class Graph {
 public:
  int make(Tensor<T> val, std::vector<int> parents, bool needs_grad,
           std::function<void(Graph&, int)> back = nullptr) {
    Node n;
    n.val = std::move(val);
    n.parents = std::move(parents);
    n.needs = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int constant(Tensor<T> val) { return make(std::move(val), {}, false); }

  int leaf(Tensor<T> val, bool needs_grad) { return make(std::move(val), {}, needs_grad); }

  int param(Param<T>& p) {
    int id = make(p.w, {}, true);
    nodes_[static_cast<std::size_t>(id)].bound = &p;
    return id;
  }

  Tensor<T>& val(int id) { return nodes_.at(static_cast<std::size_t>(id)).val; }
  const Tensor<T>& val(int id) const { return nodes_.at(static_cast<std::size_t>(id)).val; }

  bool needs(int id) const { return nodes_.at(static_cast<std::size_t>(id)).needs; }

  // Gradient buffer, allocated (zeroed) on first touch.
  Tensor<T>& grad(int id) {
    Node& n = nodes_.at(static_cast<std::size_t>(id));
    if (!n.touched) {
      n.grad = Tensor<T>::zeros_like(n.val);
      n.touched = true;
    }
    return n.grad;
  }

  bool touched(int id) const { return nodes_.at(static_cast<std::size_t>(id)).touched; }

  // Seeds d(root)/d(root) = 1, sweeps the tape backwards, then adds leaf
  // gradients into their bound Param accumulators.
  void backward(int root) {
    Node& r = nodes_.at(static_cast<std::size_t>(root));
    if (r.val.numel() != 1) throw std::logic_error("backward: root must be scalar");
    grad(root).v[0] = T(1);
    for (int id = root; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (!n.touched || !n.needs) continue;
      if (n.back) n.back(*this, id);
      if (n.bound) {
        for (std::int64_t i = 0; i < n.grad.numel(); ++i) n.bound->g.v[static_cast<std::size_t>(i)] += n.grad.v[static_cast<std::size_t>(i)];
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> val;
    Tensor<T> grad;
    std::vector<int> parents;
    std::function<void(Graph&, int)> back;
    Param<T>* bound = nullptr;
    bool needs = false;
    bool touched = false;
  };
  std::vector<Node> nodes_;
};

namespace detail {

template <typename T>
bool any_needs(Graph<T>& g, std::initializer_list<int> ids) {
  for (int id : ids)
    if (g.needs(id)) return true;
  return false;
}

}  // namespace detail

// ---- elementwise ----

template <typename T, typename F, typename DF>
int unary_op(Graph<T>& g, int x, F f, DF df) {
  Tensor<T> out = Tensor<T>::zeros_like(g.val(x));
  const Tensor<T>& xv = g.val(x);
  for (std::int64_t i = 0; i < xv.numel(); ++i) out.v[static_cast<std::size_t>(i)] = f(xv.v[static_cast<std::size_t>(i)]);
  return g.make(std::move(out), {x}, g.needs(x), [x, df](Graph<T>& gg, int id) {
    if (!gg.needs(x)) return;
    const Tensor<T>& go = gg.grad(id);
    const Tensor<T>& xv = gg.val(x);
    const Tensor<T>& yv = gg.val(id);
    Tensor<T>& gx = gg.grad(x);
    for (std::int64_t i = 0; i < go.numel(); ++i) {
      auto k = static_cast<std::size_t>(i);
      gx.v[k] += go.v[k] * df(xv.v[k], yv.v[k]);
    }
  });
}

template <typename T>
int relu(Graph<T>& g, int x) {
  return unary_op(
      g, x, [](T a) { return a > T(0) ? a : T(0); },
      [](T a, T) { return a > T(0) ? T(1) : T(0); });
}

template <typename T>
int tanh_(Graph<T>& g, int x) {
  return unary_op(
      g, x, [](T a) { return std::tanh(a); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
int sigmoid_(Graph<T>& g, int x) {
  return unary_op(
      g, x, [](T a) { return T(1) / (T(1) + std::exp(-a)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
int exp_(Graph<T>& g, int x) {
  return unary_op(
      g, x, [](T a) { return std::exp(a); }, [](T, T y) { return y; });
}

template <typename T>
int log_(Graph<T>& g, int x) {
  return unary_op(
      g, x, [](T a) { return std::log(a); }, [](T a, T) { return T(1) / a; });
}

template <typename T>
int square(Graph<T>& g, int x) {
  return unary_op(
      g, x, [](T a) { return a * a; }, [](T a, T) { return T(2) * a; });
}

template <typename T>
int muls(Graph<T>& g, int x, T c) {
  return unary_op(
      g, x, [c](T a) { return a * c; }, [c](T, T) { return c; });
}

template <typename T>
int adds(Graph<T>& g, int x, T c) {
  return unary_op(
      g, x, [c](T a) { return a + c; }, [](T, T) { return T(1); });
}

// Gradient passes through the interior and the boundary, zero outside.
template <typename T>
int clamp_(Graph<T>& g, int x, T lo, T hi) {
  return unary_op(
      g, x, [lo, hi](T a) { return a < lo ? lo : (a > hi ? hi : a); },
      [lo, hi](T a, T) { return (a >= lo && a <= hi) ? T(1) : T(0); });
}

template <typename T, typename F, typename DA, typename DB>
int binary_op(Graph<T>& g, int a, int b, F f, DA dfa, DB dfb) {
  const Tensor<T>& av = g.val(a);
  const Tensor<T>& bv = g.val(b);
  if (!av.same_shape(bv)) throw std::invalid_argument("binary op: shape mismatch");
  Tensor<T> out = Tensor<T>::zeros_like(av);
  for (std::int64_t i = 0; i < av.numel(); ++i) {
    auto k = static_cast<std::size_t>(i);
    out.v[k] = f(av.v[k], bv.v[k]);
  }
  return g.make(std::move(out), {a, b}, detail::any_needs(g, {a, b}),
                [a, b, dfa, dfb](Graph<T>& gg, int id) {
                  const Tensor<T>& go = gg.grad(id);
                  const Tensor<T>& av = gg.val(a);
                  const Tensor<T>& bv = gg.val(b);
                  if (gg.needs(a)) {
                    Tensor<T>& ga = gg.grad(a);
                    for (std::int64_t i = 0; i < go.numel(); ++i) {
                      auto k = static_cast<std::size_t>(i);
                      ga.v[k] += go.v[k] * dfa(av.v[k], bv.v[k]);
                    }
                  }
                  if (gg.needs(b)) {
                    Tensor<T>& gb = gg.grad(b);
                    for (std::int64_t i = 0; i < go.numel(); ++i) {
                      auto k = static_cast<std::size_t>(i);
                      gb.v[k] += go.v[k] * dfb(av.v[k], bv.v[k]);
                    }
                  }
                });
}

template <typename T>
int add(Graph<T>& g, int a, int b) {
  return binary_op(
      g, a, b, [](T x, T y) { return x + y; }, [](T, T) { return T(1); },
      [](T, T) { return T(1); });
}

template <typename T>
int sub(Graph<T>& g, int a, int b) {
  return binary_op(
      g, a, b, [](T x, T y) { return x - y; }, [](T, T) { return T(1); },
      [](T, T) { return T(-1); });
}

template <typename T>
int mul(Graph<T>& g, int a, int b) {
  return binary_op(
      g, a, b, [](T x, T y) { return x * y; }, [](T, T y) { return y; },
      [](T x, T) { return x; });
}

template <typename T>
int div_(Graph<T>& g, int a, int b) {
  return binary_op(
      g, a, b, [](T x, T y) { return x / y; }, [](T, T y) { return T(1) / y; },
      [](T x, T y) { return -x / (y * y); });
}

// Ties take the first argument's gradient.
template <typename T>
int minimum(Graph<T>& g, int a, int b) {
  return binary_op(
      g, a, b, [](T x, T y) { return x <= y ? x : y; },
      [](T x, T y) { return x <= y ? T(1) : T(0); },
      [](T x, T y) { return x <= y ? T(0) : T(1); });
}

// ---- shape / broadcast ----

template <typename T>
int reshape(Graph<T>& g, int x, std::vector<int> shape) {
  const Tensor<T>& xv = g.val(x);
  if (Tensor<T>::numel_of(shape) != xv.numel()) throw std::invalid_argument("reshape: size mismatch");
  Tensor<T> out(std::move(shape), xv.v);
  return g.make(std::move(out), {x}, g.needs(x), [x](Graph<T>& gg, int id) {
    if (!gg.needs(x)) return;
    const Tensor<T>& go = gg.grad(id);
    Tensor<T>& gx = gg.grad(x);
    for (std::int64_t i = 0; i < go.numel(); ++i) gx.v[static_cast<std::size_t>(i)] += go.v[static_cast<std::size_t>(i)];
  });
}

// [F] -> [rows, F]; backward sums over rows.
template <typename T>
int expand_rows(Graph<T>& g, int x, int rows) {
  const Tensor<T>& xv = g.val(x);
  if (xv.ndim() != 1) throw std::invalid_argument("expand_rows: want 1-d input");
  const int f = xv.dim(0);
  Tensor<T> out({rows, f});
  for (int r = 0; r < rows; ++r)
    for (int i = 0; i < f; ++i) out.v[static_cast<std::size_t>(r) * f + i] = xv.v[static_cast<std::size_t>(i)];
  return g.make(std::move(out), {x}, g.needs(x), [x, rows, f](Graph<T>& gg, int id) {
    if (!gg.needs(x)) return;
    const Tensor<T>& go = gg.grad(id);
    Tensor<T>& gx = gg.grad(x);
    for (int r = 0; r < rows; ++r)
      for (int i = 0; i < f; ++i) gx.v[static_cast<std::size_t>(i)] += go.v[static_cast<std::size_t>(r) * f + i];
  });
}

template <typename T>
int concat_cols(Graph<T>& g, int a, int b) {
  const Tensor<T>& av = g.val(a);
  const Tensor<T>& bv = g.val(b);
  if (av.ndim() != 2 || bv.ndim() != 2 || av.dim(0) != bv.dim(0))
    throw std::invalid_argument("concat_cols: want [B,Fa],[B,Fb]");
  const int rows = av.dim(0), fa = av.dim(1), fb = bv.dim(1);
  Tensor<T> out({rows, fa + fb});
  for (int r = 0; r < rows; ++r) {
    for (int i = 0; i < fa; ++i) out.v[static_cast<std::size_t>(r) * (fa + fb) + i] = av.v[static_cast<std::size_t>(r) * fa + i];
    for (int i = 0; i < fb; ++i) out.v[static_cast<std::size_t>(r) * (fa + fb) + fa + i] = bv.v[static_cast<std::size_t>(r) * fb + i];
  }
  return g.make(std::move(out), {a, b}, detail::any_needs(g, {a, b}),
                [a, b, rows, fa, fb](Graph<T>& gg, int id) {
                  const Tensor<T>& go = gg.grad(id);
                  if (gg.needs(a)) {
                    Tensor<T>& ga = gg.grad(a);
                    for (int r = 0; r < rows; ++r)
                      for (int i = 0; i < fa; ++i)
                        ga.v[static_cast<std::size_t>(r) * fa + i] += go.v[static_cast<std::size_t>(r) * (fa + fb) + i];
                  }
                  if (gg.needs(b)) {
                    Tensor<T>& gb = gg.grad(b);
                    for (int r = 0; r < rows; ++r)
                      for (int i = 0; i < fb; ++i)
                        gb.v[static_cast<std::size_t>(r) * fb + i] += go.v[static_cast<std::size_t>(r) * (fa + fb) + fa + i];
                  }
                });
}

// ---- reductions ----

template <typename T>
int sum(Graph<T>& g, int x) {
  const Tensor<T>& xv = g.val(x);
  T acc = T(0);
  for (T a : xv.v) acc += a;
  Tensor<T> out({1});
  out.v[0] = acc;
  return g.make(std::move(out), {x}, g.needs(x), [x](Graph<T>& gg, int id) {
    if (!gg.needs(x)) return;
    const T go = gg.grad(id).v[0];
    Tensor<T>& gx = gg.grad(x);
    for (auto& e : gx.v) e += go;
  });
}

template <typename T>
int mean(Graph<T>& g, int x) {
  const std::int64_t n = g.val(x).numel();
  return muls(g, sum(g, x), T(1) / static_cast<T>(n));
}

// [B,F] -> [B]
template <typename T>
int row_sum(Graph<T>& g, int x) {
  const Tensor<T>& xv = g.val(x);
  if (xv.ndim() != 2) throw std::invalid_argument("row_sum: want [B,F]");
  const int rows = xv.dim(0), f = xv.dim(1);
  Tensor<T> out({rows});
  for (int r = 0; r < rows; ++r) {
    T acc = T(0);
    for (int i = 0; i < f; ++i) acc += xv.v[static_cast<std::size_t>(r) * f + i];
    out.v[static_cast<std::size_t>(r)] = acc;
  }
  return g.make(std::move(out), {x}, g.needs(x), [x, rows, f](Graph<T>& gg, int id) {
    if (!gg.needs(x)) return;
    const Tensor<T>& go = gg.grad(id);
    Tensor<T>& gx = gg.grad(x);
    for (int r = 0; r < rows; ++r)
      for (int i = 0; i < f; ++i) gx.v[static_cast<std::size_t>(r) * f + i] += go.v[static_cast<std::size_t>(r)];
  });
}

// ---- linear algebra ----

// x [B,I] with weight [O,I] and bias [O] -> [B,O]
template <typename T>
int linear(Graph<T>& g, int x, int w, int b) {
  const Tensor<T>& xv = g.val(x);
  const Tensor<T>& wv = g.val(w);
  const Tensor<T>& bv = g.val(b);
  if (xv.ndim() != 2 || wv.ndim() != 2 || bv.ndim() != 1 || xv.dim(1) != wv.dim(1) ||
      bv.dim(0) != wv.dim(0))
    throw std::invalid_argument("linear: shape mismatch");
  const int B = xv.dim(0), I = xv.dim(1), O = wv.dim(0);
  Tensor<T> out({B, O});
  ConstMatMap<T> X(xv.data(), B, I), W(wv.data(), O, I);
  MatMap<T> Y(out.data(), B, O);
  Y.noalias() = X * W.transpose();
  for (int r = 0; r < B; ++r)
    for (int i = 0; i < O; ++i) out.v[static_cast<std::size_t>(r) * O + i] += bv.v[static_cast<std::size_t>(i)];
  return g.make(std::move(out), {x, w, b}, detail::any_needs(g, {x, w, b}),
                [x, w, b, B, I, O](Graph<T>& gg, int id) {
                  ConstMatMap<T> dY(gg.grad(id).data(), B, O);
                  if (gg.needs(x)) {
                    ConstMatMap<T> W(gg.val(w).data(), O, I);
                    MatMap<T> dX(gg.grad(x).data(), B, I);
                    dX.noalias() += dY * W;
                  }
                  if (gg.needs(w)) {
                    ConstMatMap<T> X(gg.val(x).data(), B, I);
                    MatMap<T> dW(gg.grad(w).data(), O, I);
                    dW.noalias() += dY.transpose() * X;
                  }
                  if (gg.needs(b)) {
                    Tensor<T>& db = gg.grad(b);
                    const Tensor<T>& go = gg.grad(id);
                    for (int r = 0; r < B; ++r)
                      for (int i = 0; i < O; ++i) db.v[static_cast<std::size_t>(i)] += go.v[static_cast<std::size_t>(r) * O + i];
                  }
                });
}

// ---- losses ----

// Mean squared error against a constant target.
template <typename T>
int mse_loss(Graph<T>& g, int pred, int target) {
  return mean(g, square(g, sub(g, pred, target)));
}

// Mean binary cross-entropy; probabilities clamped to [1e-7, 1-1e-7].
template <typename T>
int bce_loss(Graph<T>& g, int prob, int target) {
  const T eps = T(1e-7);
  int p = clamp_(g, prob, eps, T(1) - eps);
  int t = target;
  int pos = mul(g, t, log_(g, p));
  int one_minus_t = adds(g, muls(g, t, T(-1)), T(1));
  int one_minus_p = adds(g, muls(g, p, T(-1)), T(1));
  int neg = mul(g, one_minus_t, log_(g, one_minus_p));
  return muls(g, mean(g, add(g, pos, neg)), T(-1));
}

}  // namespace ts::nn
