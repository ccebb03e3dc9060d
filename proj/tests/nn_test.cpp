#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "tslam/nn/checkpoint.hpp"
#include "tslam/nn/layers.hpp"
#include "tslam/util/rng.hpp"

namespace {

using ts::nn::Graph;
using ts::nn::Param;
using ts::nn::Tensor;

using BuildFn = std::function<int(Graph<double>&)>;

double eval_loss(const BuildFn& build, bool do_backward) {
  Graph<double> g;
  const int loss = build(g);
  REQUIRE(g.val(loss).numel() == 1);
  const double v = g.val(loss).v[0];
  if (do_backward) g.backward(loss);
  return v;
}

// Central finite differences against the tape gradients, step 1e-5, double
// precision, relative error bound 1e-4.
void gradcheck(const BuildFn& build, const std::vector<Param<double>*>& params) {
  for (auto* p : params) p->zero_grad();
  eval_loss(build, true);
  std::vector<std::vector<double>> analytic;
  for (auto* p : params) analytic.push_back(p->g.v);

  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Param<double>* p = params[pi];
    for (std::size_t i = 0; i < p->w.v.size(); ++i) {
      const double keep = p->w.v[i];
      p->w.v[i] = keep + h;
      const double lp = eval_loss(build, false);
      p->w.v[i] = keep - h;
      const double lm = eval_loss(build, false);
      p->w.v[i] = keep;
      const double gn = (lp - lm) / (2 * h);
      const double ga = analytic[pi][i];
      const double rel = std::abs(ga - gn) / std::max(1.0, std::abs(ga) + std::abs(gn));
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-4);
}

Tensor<double> random_tensor(std::vector<int> shape, ts::Rng& rng, double scale = 1.0) {
  Tensor<double> t(std::move(shape));
  for (auto& e : t.v) e = rng.normal() * scale;
  return t;
}

// Weights every output element differently so no gradient can hide.
int project(Graph<double>& g, int x, const Tensor<double>& weights) {
  return ts::nn::sum(g, ts::nn::mul(g, x, g.constant(weights)));
}

}  // namespace

TEST_CASE("linear layer matches finite differences") {
  ts::Rng rng(11);
  Param<double> x("x", {4, 5}), w("w", {3, 5}), b("b", {3});
  x.w = random_tensor({4, 5}, rng);
  w.w = random_tensor({3, 5}, rng);
  b.w = random_tensor({3}, rng);
  const Tensor<double> proj = random_tensor({4, 3}, rng);
  gradcheck(
      [&](Graph<double>& g) {
        return project(g, ts::nn::linear(g, g.param(x), g.param(w), g.param(b)), proj);
      },
      {&x, &w, &b});
}

TEST_CASE("conv3d matches finite differences") {
  ts::Rng rng(12);
  struct Case {
    int stride, pad, in;
  };
  for (const auto& c : {Case{1, 1, 5}, Case{2, 1, 5}, Case{1, 0, 5}}) {
    Param<double> x("x", {2, 2, c.in, c.in, c.in}), w("w", {3, 2, 3, 3, 3}), b("b", {3});
    x.w = random_tensor(x.w.shape, rng, 0.5);
    w.w = random_tensor(w.w.shape, rng, 0.5);
    b.w = random_tensor(b.w.shape, rng, 0.5);
    const int od = (c.in + 2 * c.pad - 3) / c.stride + 1;
    const Tensor<double> proj = random_tensor({2, 3, od, od, od}, rng);
    gradcheck(
        [&](Graph<double>& g) {
          return project(g, ts::nn::conv3d(g, g.param(x), g.param(w), g.param(b), c.stride, c.pad),
                         proj);
        },
        {&x, &w, &b});
  }
}

TEST_CASE("elementwise ops match finite differences") {
  ts::Rng rng(13);
  Param<double> x("x", {3, 4});
  // Keep values away from relu/clamp kinks so central differences are valid.
  for (auto& e : x.w.v) {
    e = rng.normal();
    if (std::abs(e) < 0.2) e += e < 0 ? -0.3 : 0.3;
  }
  const Tensor<double> proj = random_tensor({3, 4}, rng);

  auto check_unary = [&](const std::function<int(Graph<double>&, int)>& op) {
    gradcheck([&](Graph<double>& g) { return project(g, op(g, g.param(x)), proj); }, {&x});
  };
  check_unary([](Graph<double>& g, int v) { return ts::nn::relu(g, v); });
  check_unary([](Graph<double>& g, int v) { return ts::nn::tanh_(g, v); });
  check_unary([](Graph<double>& g, int v) { return ts::nn::sigmoid_(g, v); });
  check_unary([](Graph<double>& g, int v) { return ts::nn::exp_(g, v); });
  check_unary([](Graph<double>& g, int v) { return ts::nn::square(g, v); });
  check_unary([](Graph<double>& g, int v) { return ts::nn::muls(g, v, 1.7); });
  check_unary([](Graph<double>& g, int v) { return ts::nn::adds(g, v, -0.4); });
  check_unary([](Graph<double>& g, int v) { return ts::nn::clamp_(g, v, -0.9, 0.9); });
  check_unary([](Graph<double>& g, int v) {
    return ts::nn::log_(g, ts::nn::adds(g, ts::nn::square(g, v), 0.1));
  });

  Param<double> y("y", {3, 4});
  y.w = random_tensor({3, 4}, rng);
  for (std::size_t i = 0; i < y.w.v.size(); ++i)
    if (std::abs(y.w.v[i] - x.w.v[i]) < 0.2) y.w.v[i] += 0.5;
  auto check_binary = [&](const std::function<int(Graph<double>&, int, int)>& op) {
    gradcheck([&](Graph<double>& g) { return project(g, op(g, g.param(x), g.param(y)), proj); },
              {&x, &y});
  };
  check_binary([](Graph<double>& g, int a, int b) { return ts::nn::add(g, a, b); });
  check_binary([](Graph<double>& g, int a, int b) { return ts::nn::sub(g, a, b); });
  check_binary([](Graph<double>& g, int a, int b) { return ts::nn::mul(g, a, b); });
  check_binary([](Graph<double>& g, int a, int b) { return ts::nn::minimum(g, a, b); });
  check_binary([](Graph<double>& g, int a, int b) {
    return ts::nn::div_(g, a, ts::nn::adds(g, ts::nn::square(g, b), 0.5));
  });
}

TEST_CASE("shape and reduction ops match finite differences") {
  ts::Rng rng(14);
  Param<double> x("x", {3, 4}), y("y", {3, 2}), v("v", {4});
  x.w = random_tensor({3, 4}, rng);
  y.w = random_tensor({3, 2}, rng);
  v.w = random_tensor({4}, rng);
  const Tensor<double> proj6 = random_tensor({3, 6}, rng);
  const Tensor<double> proj34 = random_tensor({3, 4}, rng);
  const Tensor<double> proj3 = random_tensor({3}, rng);
  const Tensor<double> proj12 = random_tensor({12}, rng);

  gradcheck(
      [&](Graph<double>& g) {
        return project(g, ts::nn::concat_cols(g, g.param(x), g.param(y)), proj6);
      },
      {&x, &y});
  gradcheck(
      [&](Graph<double>& g) {
        return project(g, ts::nn::expand_rows(g, g.param(v), 3), proj34);
      },
      {&v});
  gradcheck([&](Graph<double>& g) { return project(g, ts::nn::row_sum(g, g.param(x)), proj3); },
            {&x});
  gradcheck(
      [&](Graph<double>& g) { return project(g, ts::nn::reshape(g, g.param(x), {12}), proj12); },
      {&x});
  gradcheck([&](Graph<double>& g) { return ts::nn::mean(g, g.param(x)); }, {&x});
}

TEST_CASE("losses match finite differences") {
  ts::Rng rng(15);
  Param<double> x("x", {10});
  x.w = random_tensor({10}, rng);
  Tensor<double> target({10});
  for (std::size_t i = 0; i < 10; ++i) target.v[i] = i % 2 ? 1.0 : 0.0;
  Tensor<double> mse_target = random_tensor({10}, rng);

  gradcheck(
      [&](Graph<double>& g) {
        return ts::nn::bce_loss(g, ts::nn::sigmoid_(g, g.param(x)), g.constant(target));
      },
      {&x});
  gradcheck(
      [&](Graph<double>& g) { return ts::nn::mse_loss(g, g.param(x), g.constant(mse_target)); },
      {&x});
}

TEST_CASE("trilinear gather equals the hat-function oracle and passes gradcheck") {
  ts::Rng rng(16);
  const int C = 3, R = 4, P = 50;
  Param<double> lat("lat", {C, R, R, R});
  lat.w = random_tensor(lat.w.shape, rng);
  Tensor<double> pts({P, 3});
  for (auto& e : pts.v) e = rng.uniform();
  pts.v[0] = 0.0;
  pts.v[1] = 1.0 / 3.0;  // exactly node 1 of axis y
  pts.v[2] = 1.0;

  Graph<double> g;
  const int out = ts::nn::trilinear(g, g.param(lat), pts);

  // Oracle: per-axis hat weights over every node of the lattice.
  for (int p = 0; p < P; ++p) {
    for (int c = 0; c < C; ++c) {
      double acc = 0.0;
      for (int z = 0; z < R; ++z)
        for (int y = 0; y < R; ++y)
          for (int x = 0; x < R; ++x) {
            double w = 1.0;
            const int idx[3] = {x, y, z};
            for (int a = 0; a < 3; ++a) {
              const double s = pts.v[static_cast<std::size_t>(p) * 3 + a] * (R - 1);
              w *= std::max(0.0, 1.0 - std::abs(s - idx[a]));
            }
            acc += w * lat.w.v[((static_cast<std::size_t>(c) * R + z) * R + y) * R + x];
          }
      CHECK(g.val(out).v[static_cast<std::size_t>(p) * C + c] == doctest::Approx(acc).epsilon(1e-12));
    }
  }

  // A query at an exact lattice node returns the node feature.
  Tensor<double> node_pt({1, 3});
  node_pt.v = {1.0 / 3.0, 2.0 / 3.0, 1.0};
  Graph<double> g2;
  const int out2 = ts::nn::trilinear(g2, g2.param(lat), node_pt);
  for (int c = 0; c < C; ++c)
    CHECK(g2.val(out2).v[static_cast<std::size_t>(c)] ==
          doctest::Approx(lat.w.v[((static_cast<std::size_t>(c) * R + 3) * R + 2) * R + 1]).epsilon(1e-13));

  // A query at a cell center averages the 8 surrounding corners.
  Tensor<double> center({1, 3});
  center.v = {0.5 / (R - 1), 0.5 / (R - 1), 0.5 / (R - 1)};
  Graph<double> g3;
  const int out3 = ts::nn::trilinear(g3, g3.param(lat), center);
  for (int c = 0; c < C; ++c) {
    double acc = 0.0;
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          acc += lat.w.v[((static_cast<std::size_t>(c) * R + dz) * R + dy) * R + dx];
    CHECK(g3.val(out3).v[static_cast<std::size_t>(c)] == doctest::Approx(acc / 8.0).epsilon(1e-13));
  }

  const Tensor<double> proj = random_tensor({P, C}, rng);
  gradcheck([&](Graph<double>& g4) { return project(g4, ts::nn::trilinear(g4, g4.param(lat), pts), proj); },
            {&lat});
}

TEST_CASE("composite conv encoder with pose concat passes gradcheck") {
  ts::Rng rng(17);
  const int B = 2;
  ts::nn::Conv3dLayer<double> conv("enc", 1, 2, 3, 2, 1);
  conv.init(rng);
  ts::nn::Mlp<double> head("head", {2 * 4 * 4 * 4 + 3, 8, 2});
  head.init(rng);
  Param<double> x("x", {B, 1, 8, 8, 8}), pose("pose", {B, 3});
  x.w = random_tensor(x.w.shape, rng, 0.5);
  pose.w = random_tensor(pose.w.shape, rng, 0.5);
  const Tensor<double> proj = random_tensor({B, 2}, rng);

  std::vector<Param<double>*> params = {&x, &pose};
  conv.collect(params);
  head.collect(params);
  gradcheck(
      [&](Graph<double>& g) {
        int h = ts::nn::relu(g, conv.forward(g, g.param(x)));
        h = ts::nn::reshape(g, h, {B, 2 * 4 * 4 * 4});
        h = ts::nn::concat_cols(g, h, g.param(pose));
        h = ts::nn::tanh_(g, head.forward(g, h));
        return project(g, h, proj);
      },
      params);
}

TEST_CASE("tiny pyramid encoder with trilinear decoder passes gradcheck") {
  ts::Rng rng(18);
  const int N = 8, P = 16;
  ts::nn::Conv3dLayer<double> c1("c1", 1, 2, 3, 1, 1);
  ts::nn::Conv3dLayer<double> c2("c2", 2, 3, 3, 2, 1);
  ts::nn::Mlp<double> dec("dec", {5, 8, 1});
  c1.init(rng);
  c2.init(rng);
  dec.init(rng);
  Param<double> x("x", {1, 1, N, N, N});
  x.w = random_tensor(x.w.shape, rng, 0.5);
  Tensor<double> pts({P, 3});
  for (auto& e : pts.v) e = rng.uniform();
  Tensor<double> labels({P});
  for (std::size_t i = 0; i < P; ++i) labels.v[i] = i % 2 ? 1.0 : 0.0;

  std::vector<Param<double>*> params = {&x};
  c1.collect(params);
  c2.collect(params);
  dec.collect(params);
  gradcheck(
      [&](Graph<double>& g) {
        int f1 = ts::nn::relu(g, c1.forward(g, g.param(x)));
        int f2 = ts::nn::relu(g, c2.forward(g, f1));
        int q1 = ts::nn::trilinear(g, ts::nn::reshape(g, f1, {2, N, N, N}), pts);
        int q2 = ts::nn::trilinear(g, ts::nn::reshape(g, f2, {3, N / 2, N / 2, N / 2}), pts);
        int feat = ts::nn::concat_cols(g, q1, q2);
        int prob = ts::nn::sigmoid_(g, ts::nn::reshape(g, dec.forward(g, feat), {P}));
        return ts::nn::bce_loss(g, prob, g.constant(labels));
      },
      params);
}

TEST_CASE("adam follows the update formula") {
  Param<float> p("p", {1});
  p.w.v[0] = 1.0f;
  ts::nn::Adam<float> opt;
  opt.lr = 0.1f;
  // Constant gradient: after bias correction each step moves by ~lr.
  p.g.v[0] = 0.5f;
  opt.step({&p});
  CHECK(p.w.v[0] == doctest::Approx(0.9f).epsilon(1e-6));
  p.g.v[0] = 0.5f;
  opt.step({&p});
  CHECK(p.w.v[0] == doctest::Approx(0.8f).epsilon(1e-6));
}

TEST_CASE("parameter init is deterministic per seed") {
  ts::Rng a(99), b(99), c(100);
  ts::nn::Linear<float> la("l", 16, 8), lb("l", 16, 8), lc("l", 16, 8);
  la.init(a);
  lb.init(b);
  lc.init(c);
  CHECK(la.w.w.v == lb.w.w.v);
  CHECK(la.w.w.v != lc.w.w.v);
}

TEST_CASE("tensor checkpoint file round-trips bit-exactly") {
  ts::Rng rng(21);
  ts::nn::Linear<float> l1("net.fc0", 6, 4);
  ts::nn::Conv3dLayer<float> l2("net.conv", 2, 3, 3, 1, 1);
  l1.init(rng);
  l2.init(rng);
  std::vector<Param<float>*> params;
  l1.collect(params);
  l2.collect(params);

  const std::string path = (ttest::scratch_dir() / "ckpt.bin").string();
  save_tensor_file(path, "TPOL", 0xdeadbeefcafe1234ull, ts::nn::export_params(params));

  const ts::nn::TensorFile f = ts::nn::load_tensor_file(path, "TPOL");
  CHECK(f.version == 1);
  CHECK(f.config_digest == 0xdeadbeefcafe1234ull);
  CHECK(f.tensors.size() == 4);

  ts::Rng rng2(22);
  ts::nn::Linear<float> m1("net.fc0", 6, 4);
  ts::nn::Conv3dLayer<float> m2("net.conv", 2, 3, 3, 1, 1);
  m1.init(rng2);
  m2.init(rng2);
  std::vector<Param<float>*> params2;
  m1.collect(params2);
  m2.collect(params2);
  import_params(f, params2);
  CHECK(m1.w.w.v == l1.w.w.v);
  CHECK(m1.b.w.v == l1.b.w.v);
  CHECK(m2.w.w.v == l2.w.w.v);

  CHECK_THROWS(ts::nn::load_tensor_file(path, "TREC"));
  CHECK_THROWS(f.find("net.missing"));
}
