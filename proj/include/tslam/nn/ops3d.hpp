#pragma once

#include <cmath>

#include "tslam/nn/graph.hpp"

namespace ts::nn {

namespace detail {

inline int conv_out_dim(int in, int k, int stride, int pad) {
  const int span = in + 2 * pad - k;
  if (span < 0) throw std::invalid_argument("conv3d: kernel larger than padded input");
  return span / stride + 1;
}

// Column matrix [Cin*k^3, OD*OH*OW] for one batch item, zero padded.
template <typename T>
void im2col(const T* x, int cin, int d, int h, int w, int k, int stride, int pad, int od, int oh,
            int ow, T* col) {
  const std::int64_t n_out = static_cast<std::int64_t>(od) * oh * ow;
  std::int64_t row = 0;
  for (int c = 0; c < cin; ++c) {
    const T* xc = x + static_cast<std::int64_t>(c) * d * h * w;
    for (int kd = 0; kd < k; ++kd)
      for (int kh = 0; kh < k; ++kh)
        for (int kw = 0; kw < k; ++kw, ++row) {
          T* dst = col + row * n_out;
          std::int64_t i = 0;
          for (int zo = 0; zo < od; ++zo) {
            const int z = zo * stride - pad + kd;
            const bool zok = z >= 0 && z < d;
            for (int yo = 0; yo < oh; ++yo) {
              const int y = yo * stride - pad + kh;
              const bool yok = y >= 0 && y < h;
              for (int xo = 0; xo < ow; ++xo, ++i) {
                const int xx = xo * stride - pad + kw;
                dst[i] = (zok && yok && xx >= 0 && xx < w)
                             ? xc[(static_cast<std::int64_t>(z) * h + y) * w + xx]
                             : T(0);
              }
            }
          }
        }
  }
}

template <typename T>
void col2im_add(const T* col, int cin, int d, int h, int w, int k, int stride, int pad, int od,
                int oh, int ow, T* gx) {
  const std::int64_t n_out = static_cast<std::int64_t>(od) * oh * ow;
  std::int64_t row = 0;
  for (int c = 0; c < cin; ++c) {
    T* gc = gx + static_cast<std::int64_t>(c) * d * h * w;
    for (int kd = 0; kd < k; ++kd)
      for (int kh = 0; kh < k; ++kh)
        for (int kw = 0; kw < k; ++kw, ++row) {
          const T* src = col + row * n_out;
          std::int64_t i = 0;
          for (int zo = 0; zo < od; ++zo) {
            const int z = zo * stride - pad + kd;
            const bool zok = z >= 0 && z < d;
            for (int yo = 0; yo < oh; ++yo) {
              const int y = yo * stride - pad + kh;
              const bool yok = y >= 0 && y < h;
              for (int xo = 0; xo < ow; ++xo, ++i) {
                const int xx = xo * stride - pad + kw;
                if (zok && yok && xx >= 0 && xx < w)
                  gc[(static_cast<std::int64_t>(z) * h + y) * w + xx] += src[i];
              }
            }
          }
        }
  }
}

}  // namespace detail

// x [B,Cin,D,H,W], weight [Cout,Cin,k,k,k], bias [Cout] -> [B,Cout,OD,OH,OW].
// im2col + GEMM; the column matrix is rebuilt in the backward pass instead of
// being cached, trading FLOPs for activation memory.
template <typename T>
int conv3d(Graph<T>& g, int x, int w, int b, int stride, int pad) {
  const Tensor<T>& xv = g.val(x);
  const Tensor<T>& wv = g.val(w);
  const Tensor<T>& bv = g.val(b);
  if (xv.ndim() != 5 || wv.ndim() != 5 || bv.ndim() != 1)
    throw std::invalid_argument("conv3d: want x[B,C,D,H,W], w[O,C,k,k,k], b[O]");
  const int B = xv.dim(0), cin = xv.dim(1), D = xv.dim(2), H = xv.dim(3), W = xv.dim(4);
  const int cout = wv.dim(0), k = wv.dim(2);
  if (wv.dim(1) != cin || wv.dim(3) != k || wv.dim(4) != k || bv.dim(0) != cout)
    throw std::invalid_argument("conv3d: weight/bias shape mismatch");
  const int od = detail::conv_out_dim(D, k, stride, pad);
  const int oh = detail::conv_out_dim(H, k, stride, pad);
  const int ow = detail::conv_out_dim(W, k, stride, pad);
  const std::int64_t n_out = static_cast<std::int64_t>(od) * oh * ow;
  const std::int64_t krows = static_cast<std::int64_t>(cin) * k * k * k;
  const std::int64_t in_sz = static_cast<std::int64_t>(cin) * D * H * W;
  const std::int64_t out_sz = static_cast<std::int64_t>(cout) * n_out;

  Tensor<T> out({B, cout, od, oh, ow});
  std::vector<T> col(static_cast<std::size_t>(krows * n_out));
  ConstMatMap<T> Wm(wv.data(), cout, static_cast<int>(krows));
  for (int bi = 0; bi < B; ++bi) {
    detail::im2col(xv.data() + bi * in_sz, cin, D, H, W, k, stride, pad, od, oh, ow, col.data());
    ConstMatMap<T> C(col.data(), static_cast<int>(krows), static_cast<int>(n_out));
    MatMap<T> Y(out.data() + bi * out_sz, cout, static_cast<int>(n_out));
    Y.noalias() = Wm * C;
    for (int c = 0; c < cout; ++c)
      Y.row(c).array() += bv.v[static_cast<std::size_t>(c)];
  }

  return g.make(
      std::move(out), {x, w, b}, detail::any_needs(g, {x, w, b}),
      [x, w, b, B, cin, D, H, W, cout, k, stride, pad, od, oh, ow, n_out, krows, in_sz,
       out_sz](Graph<T>& gg, int id) {
        const Tensor<T>& go = gg.grad(id);
        std::vector<T> col(static_cast<std::size_t>(krows * n_out));
        for (int bi = 0; bi < B; ++bi) {
          ConstMatMap<T> dY(go.data() + bi * out_sz, cout, static_cast<int>(n_out));
          if (gg.needs(w) || gg.needs(x))
            detail::im2col(gg.val(x).data() + bi * in_sz, cin, D, H, W, k, stride, pad, od, oh,
                           ow, col.data());
          if (gg.needs(w)) {
            ConstMatMap<T> C(col.data(), static_cast<int>(krows), static_cast<int>(n_out));
            MatMap<T> dW(gg.grad(w).data(), cout, static_cast<int>(krows));
            dW.noalias() += dY * C.transpose();
          }
          if (gg.needs(b)) {
            // Fixed-order accumulation: Eigen's vectorized sum() picks its
            // split from the buffer alignment, which varies between runs.
            Tensor<T>& db = gg.grad(b);
            const T* gp = go.data() + bi * out_sz;
            for (int c = 0; c < cout; ++c) {
              T acc = T(0);
              for (std::int64_t i = 0; i < n_out; ++i) acc += gp[c * n_out + i];
              db.v[static_cast<std::size_t>(c)] += acc;
            }
          }
          if (gg.needs(x)) {
            ConstMatMap<T> Wm(gg.val(w).data(), cout, static_cast<int>(krows));
            MatMap<T> dC(col.data(), static_cast<int>(krows), static_cast<int>(n_out));
            dC.noalias() = Wm.transpose() * dY;
            detail::col2im_add(col.data(), cin, D, H, W, k, stride, pad, od, oh, ow,
                               gg.grad(x).data() + bi * in_sz);
          }
        }
      });
}

// Align-corners trilinear gather: lattice [C,R,R,R] sampled at P points with
// coordinates in [0,1]^3 (clamped); node i sits at i/(R-1). Points are fixed
// data, gradients flow into the lattice only. Returns [P,C].
template <typename T>
int trilinear(Graph<T>& g, int lattice, const Tensor<T>& pts) {
  const Tensor<T>& lv = g.val(lattice);
  if (lv.ndim() != 4 || lv.dim(1) != lv.dim(2) || lv.dim(1) != lv.dim(3))
    throw std::invalid_argument("trilinear: want lattice [C,R,R,R]");
  if (pts.ndim() != 2 || pts.dim(1) != 3) throw std::invalid_argument("trilinear: want points [P,3]");
  const int C = lv.dim(0), R = lv.dim(1), P = pts.dim(0);
  if (R < 2) throw std::invalid_argument("trilinear: lattice resolution must be >= 2");

  struct Tap {
    std::int64_t cell;  // base node offset (z*R+y)*R+x
    T w[8];
  };
  std::vector<Tap> taps(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    T c[3], f[3];
    int i0[3];
    for (int a = 0; a < 3; ++a) {
      T u = pts.v[static_cast<std::size_t>(p) * 3 + a];
      u = u < T(0) ? T(0) : (u > T(1) ? T(1) : u);
      T s = u * static_cast<T>(R - 1);
      int i = static_cast<int>(std::floor(s));
      if (i > R - 2) i = R - 2;
      i0[a] = i;
      f[a] = s - static_cast<T>(i);
      c[a] = T(1) - f[a];
    }
    Tap& t = taps[static_cast<std::size_t>(p)];
    t.cell = (static_cast<std::int64_t>(i0[2]) * R + i0[1]) * R + i0[0];
    int w = 0;
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx, ++w)
          t.w[w] = (dz ? f[2] : c[2]) * (dy ? f[1] : c[1]) * (dx ? f[0] : c[0]);
  }

  const std::int64_t rr = static_cast<std::int64_t>(R) * R;
  const std::int64_t corner[8] = {0, 1, R, R + 1, rr, rr + 1, rr + R, rr + R + 1};
  const std::int64_t lat_sz = rr * R;

  Tensor<T> out({P, C});
  for (int p = 0; p < P; ++p) {
    const Tap& t = taps[static_cast<std::size_t>(p)];
    for (int c = 0; c < C; ++c) {
      const T* base = lv.data() + c * lat_sz + t.cell;
      T acc = T(0);
      for (int w = 0; w < 8; ++w) acc += t.w[w] * base[corner[w]];
      out.v[static_cast<std::size_t>(p) * C + c] = acc;
    }
  }

  return g.make(std::move(out), {lattice}, g.needs(lattice),
                [lattice, taps = std::move(taps), corner = std::array<std::int64_t, 8>{
                     0, 1, R, R + 1, rr, rr + 1, rr + R, rr + R + 1},
                 C, P, lat_sz](Graph<T>& gg, int id) {
                  if (!gg.needs(lattice)) return;
                  const Tensor<T>& go = gg.grad(id);
                  Tensor<T>& gl = gg.grad(lattice);
                  for (int p = 0; p < P; ++p) {
                    const Tap& t = taps[static_cast<std::size_t>(p)];
                    for (int c = 0; c < C; ++c) {
                      const T d = go.v[static_cast<std::size_t>(p) * C + c];
                      T* base = gl.data() + c * lat_sz + t.cell;
                      for (int w = 0; w < 8; ++w) base[corner[w]] += t.w[w] * d;
                    }
                  }
                });
}

}  // namespace ts::nn
