#include <algorithm>
#include <cmath>
#include <numeric>

#include "alebk/nn/adam.hpp"
#include "alebk/nn/gradcheck.hpp"
#include "alebk/nn/layers.hpp"
#include "alebk/nn/network.hpp"
#include "alebk/nn/ops.hpp"
#include "alebk/nn/rng.hpp"
#include "alebk/nn/serialize.hpp"
#include "alebk/simd/kernels.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace alebk;
using namespace alebk::nn;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

Tensor iota_tensor(Shape shape) {
  Tensor t(std::move(shape));
  std::iota(t.data().begin(), t.data().end(), 1.0);
  return t;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("every backend matches the direct convolution oracle at odd sizes") {
    Rng rng(11);
    const std::size_t sizes[][4] = {{1, 1, 1, 1}, {5, 7, 3, 5}, {7, 3, 2, 9}, {9, 11, 5, 17}, {6, 6, 32, 64}};
    for (auto backend : simd::available_backends()) {
      simd::ScopedBackend scoped(backend);
      for (const auto& s : sizes) {
        const std::size_t H = s[0], W = s[1], Ci = s[2], Co = s[3];
        const Tensor in = random_tensor({H, W, Ci}, rng), k = random_tensor({3, 3, Ci, Co}, rng),
                     b = random_tensor({Co}, rng);
        const auto want = oracle::conv3x3(in.values(), H, W, Ci, k.values(), b.values(), Co);
        const Tensor got = conv2d_forward(in, k, b);
        for (std::size_t i = 0; i < want.size(); ++i) {
          CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const auto* avx = simd::avx2_kernels();
    if (!avx) return;
    const auto& sc = simd::scalar_kernels();
    Rng rng(5);
    for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 15u, 33u, 257u}) {
      const Tensor a = random_tensor({n}, rng), b = random_tensor({n}, rng);
      CHECK(avx->dot(a.raw(), b.raw(), n) == doctest::Approx(sc.dot(a.raw(), b.raw(), n)).epsilon(1e-13));
      Tensor y1 = random_tensor({n}, rng), y2 = y1;
      sc.axpy(n, 0.37, a.raw(), y1.raw());
      avx->axpy(n, 0.37, a.raw(), y2.raw());
      for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));
    }
    const std::size_t geoms[][4] = {{5, 7, 3, 5}, {3, 9, 2, 12}, {8, 8, 32, 32}, {4, 5, 7, 1}};
    for (const auto& s : geoms) {
      const simd::Conv3x3Geometry g{s[0], s[1], s[2], s[3]};
      const Tensor in = random_tensor({g.height, g.width, g.in_channels}, rng);
      const Tensor k = random_tensor({3, 3, g.in_channels, g.out_channels}, rng);
      const Tensor go = random_tensor({g.height, g.width, g.out_channels}, rng);
      Tensor o1({g.height, g.width, g.out_channels}), o2 = o1;
      sc.conv3x3_same(g, in.raw(), k.raw(), nullptr, o1.raw());
      avx->conv3x3_same(g, in.raw(), k.raw(), nullptr, o2.raw());
      for (std::size_t i = 0; i < o1.size(); ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-12));
      Tensor gk1({3, 3, g.in_channels, g.out_channels}), gk2 = gk1, gb1({g.out_channels}), gb2 = gb1;
      sc.conv3x3_weight_grad(g, in.raw(), go.raw(), gk1.raw(), gb1.raw());
      avx->conv3x3_weight_grad(g, in.raw(), go.raw(), gk2.raw(), gb2.raw());
      for (std::size_t i = 0; i < gk1.size(); ++i) CHECK(gk1[i] == doctest::Approx(gk2[i]).epsilon(1e-12));
      for (std::size_t i = 0; i < gb1.size(); ++i) CHECK(gb1[i] == doctest::Approx(gb2[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("scalar backend can always be selected") {
    const auto backends = simd::available_backends();
    CHECK(std::find(backends.begin(), backends.end(), simd::Backend::Scalar) != backends.end());
    simd::ScopedBackend scoped(simd::Backend::Scalar);
    CHECK(simd::active().backend == simd::Backend::Scalar);
  }
}

TEST_SUITE("ops") {
  TEST_CASE("identity kernel reproduces the input") {
    const Tensor in = iota_tensor({5, 5, 1});
    Tensor k({3, 3, 1, 1});
    k[4] = 1.0;
    CHECK(conv2d_forward(in, k, Tensor({1})) == in);
  }

  TEST_CASE("zero kernels give zero output") {
    Rng rng(1);
    const Tensor out = conv2d_forward(random_tensor({4, 6, 2}, rng), Tensor({3, 3, 2, 3}), Tensor({3}));
    for (double v : out.data()) CHECK(v == 0.0);
  }

  TEST_CASE("all-ones kernel on 1..9") {
    const Tensor out = conv2d_forward(iota_tensor({3, 3, 1}), Tensor({3, 3, 1, 1}, 1.0), Tensor({1}));
    CHECK(out.at(1, 1, 0) == 45.0);
    CHECK(out.at(0, 0, 0) == 12.0);
    CHECK(out.at(0, 2, 0) == 2.0 + 3.0 + 5.0 + 6.0);
    CHECK(out.at(2, 2, 0) == 5.0 + 6.0 + 8.0 + 9.0);
  }

  TEST_CASE("conv shape errors name the shapes") {
    CHECK_THROWS_AS(conv2d_forward(Tensor({4, 4, 2}), Tensor({3, 3, 3, 1}), Tensor({1})), ShapeError);
    CHECK_THROWS_AS(conv2d_forward(Tensor({4, 4, 2}), Tensor({3, 3, 2, 4}), Tensor({3})), ShapeError);
    try {
      conv2d_forward(Tensor({4, 4, 2}), Tensor({3, 3, 3, 1}), Tensor({1}));
    } catch (const ShapeError& e) {
      CHECK(std::string(e.what()).find("[3x3x3x1]") != std::string::npos);
    }
  }

  TEST_CASE("max pooling") {
    const Tensor out = maxpool2d_forward(iota_tensor({4, 4, 1}));
    REQUIRE(out.shape() == Shape{2, 2, 1});
    CHECK(out.values() == std::vector<double>{6, 8, 14, 16});
    CHECK(maxpool2d_forward(Tensor({5, 7, 2}, 3.5)) == Tensor({2, 3, 2}, 3.5));
    CHECK_THROWS_AS(maxpool2d_forward(Tensor({1, 4, 1})), ShapeError);
    Shape s{50, 50, 64};
    for (std::size_t want : {25u, 12u, 6u}) {
      s = maxpool2d_forward(Tensor(s)).shape();
      CHECK(s[0] == want);
      CHECK(s[1] == want);
    }
  }

  TEST_CASE("dense layer") {
    const Tensor x({2}, std::vector<double>{1, 2});
    CHECK(dense_forward(x, Tensor({2, 2}, std::vector<double>{1, 1, 0, 1}), Tensor({2}, std::vector<double>{0, 1}))
              .values() == std::vector<double>{3, 3});
    CHECK(dense_forward(x, Tensor({2, 2}, std::vector<double>{1, 0, 0, 1}), Tensor({2})).values() == x.values());
    CHECK(dense_forward(x, Tensor({3, 2}), Tensor({3}, std::vector<double>{4, 5, 6})).values() ==
          std::vector<double>{4, 5, 6});
    CHECK_THROWS_AS(dense_forward(Tensor({3}), Tensor({2, 2}), Tensor({2})), ShapeError);
  }

  TEST_CASE("activations and loss") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(relu(-3.0) == 0.0);
    CHECK(relu(3.0) == 3.0);
    CHECK(1.0 - sigmoid(20.0) < 1e-8);
    CHECK(sigmoid(-20.0) < 1e-8);
    for (double x : {-800.0, -40.0, 40.0, 800.0}) {
      CHECK(sigmoid(x) > 0.0);
      CHECK(sigmoid(x) < 1.0);
    }
    CHECK(bce_loss(1.0, 1) == 0.0);
    CHECK(bce_loss(0.0, 0) == 0.0);
    CHECK(bce_loss(0.5, 0) == doctest::Approx(std::log(2.0)));
    CHECK(bce_loss(0.5, 1) == doctest::Approx(0.6931).epsilon(1e-4));
    CHECK(bce_loss(0.9, 0) == doctest::Approx(2.3026).epsilon(1e-4));
    CHECK(bce_loss(0.3, 1) > 0.0);
    CHECK_THROWS(bce_loss(0.5, 2));
  }
}

TEST_SUITE("layers") {
  TEST_CASE("finite differences agree for every parameterised and piecewise layer") {
    Rng rng(21);
    GradCheckOptions opt;
    Conv2D conv(3, 4);
    for (auto& p : conv.parameters()) p.value = random_tensor(p.value.shape(), rng);
    auto r = check_layer_gradients(conv, random_tensor({5, 6, 3}, rng), opt);
    CHECK(r.passed());
    CHECK(r.max_rel_error < 1e-4);

    Dense dense(12, 5);
    for (auto& p : dense.parameters()) p.value = random_tensor(p.value.shape(), rng);
    r = check_layer_gradients(dense, random_tensor({12}, rng), opt);
    CHECK(r.passed());

    MaxPool2D pool;
    r = check_layer_gradients(pool, random_tensor({5, 4, 3}, rng), opt);
    CHECK(r.passed());

    ReLU relu_layer;
    r = check_layer_gradients(relu_layer, random_tensor({4, 4, 2}, rng), opt);
    CHECK(r.passed());

    Sigmoid sig;
    r = check_layer_gradients(sig, random_tensor({7}, rng, -4.0, 4.0), opt);
    CHECK(r.passed());

    Dropout drop(0.5);
    Tensor x = random_tensor({40}, rng);
    drop.forward(x, Mode::Train, &rng);
    r = check_layer_gradients(drop, x, opt);
    CHECK(r.passed());
  }

  TEST_CASE("concat join splits gradients back to each branch") {
    Rng rng(4);
    std::vector<Sequential> branches;
    branches.emplace_back(std::vector<LayerSpec>{LayerSpec::conv2d(1, 2), LayerSpec::relu(), LayerSpec::maxpool2d()});
    branches.emplace_back(std::vector<LayerSpec>{LayerSpec::conv2d(1, 3), LayerSpec::relu(), LayerSpec::maxpool2d()});
    Sequential head(std::vector<LayerSpec>{LayerSpec::dense(2 * 2 * 2 + 2 * 2 * 3, 4), LayerSpec::relu(),
                                           LayerSpec::dropout(0.5), LayerSpec::dense(4, 1), LayerSpec::sigmoid()});
    Network net(std::move(branches), std::move(head));
    for (auto* p : net.parameters()) p->value = random_tensor(p->value.shape(), rng);
    const Tensor inputs[2] = {random_tensor({4, 4, 1}, rng), random_tensor({5, 4, 1}, rng)};
    for (int label : {0, 1}) {
      GradCheckOptions opt;
      opt.seed = static_cast<std::uint64_t>(label + 3);
      const auto r = check_network_gradients(net, inputs, label, opt);
      CHECK(r.passed());
      CHECK(r.checked > 50);
    }
  }

  TEST_CASE("backward before forward is rejected") {
    Conv2D conv(1, 1);
    Dense dense(2, 2);
    MaxPool2D pool;
    CHECK_THROWS_AS(conv.backward(Tensor({2, 2, 1})), std::logic_error);
    CHECK_THROWS_AS(dense.backward(Tensor({2})), std::logic_error);
    CHECK_THROWS_AS(pool.backward(Tensor({1, 1, 1})), std::logic_error);
  }

  TEST_CASE("dropout zeroes the requested fraction and is inert at inference") {
    for (double rate : {0.2, 0.5}) {
      Dropout drop(rate);
      Rng rng(99);
      const Tensor x({20000}, 1.0);
      const Tensor y = drop.forward(x, Mode::Train, &rng);
      double zeros = 0;
      for (double v : y.data()) {
        if (v == 0.0) {
          zeros += 1;
        } else {
          CHECK(v == doctest::Approx(1.0 / (1.0 - rate)));
        }
      }
      // Chi-square with one degree of freedom; 10.83 is the 0.1% critical value.
      const double n = static_cast<double>(x.size());
      const double e0 = n * rate, e1 = n * (1.0 - rate);
      const double chi2 = (zeros - e0) * (zeros - e0) / e0 + (n - zeros - e1) * (n - zeros - e1) / e1;
      CHECK(chi2 < 10.83);
      CHECK(drop.forward(x, Mode::Inference, &rng) == x);
      CHECK(drop.infer(x) == x);
    }
    CHECK_THROWS(Dropout(1.0));
    CHECK_THROWS(Dropout(-0.1));
  }

  TEST_CASE("zero output weights give bias gradient p - y") {
    std::vector<Sequential> branches;
    branches.emplace_back(std::vector<LayerSpec>{LayerSpec::conv2d(1, 1)});
    Sequential head(std::vector<LayerSpec>{LayerSpec::dense(4, 1), LayerSpec::sigmoid()});
    Network net(std::move(branches), std::move(head));
    Rng rng(2);
    const Tensor in[1] = {random_tensor({2, 2, 1}, rng)};
    for (int y : {0, 1}) {
      net.zero_grad();
      net.loss_and_backward(in, y, Mode::Train, &rng);
      const auto params = net.head().parameters();
      CHECK(params.back()->grad[0] == doctest::Approx(0.5 - y));
    }
  }
}

TEST_SUITE("adam") {
  TEST_CASE("zero gradient leaves parameters unchanged") {
    Tensor p({3}, std::vector<double>{1, -2, 3}), g({3});
    AdamState st;
    Tensor* ps[] = {&p};
    const Tensor* gs[] = {&g};
    adam_step(ps, gs, st);
    adam_step(ps, gs, st);
    CHECK(p.values() == std::vector<double>{1, -2, 3});
    CHECK(st.step == 2);
  }

  TEST_CASE("first step moves each element by about lr in the gradient's direction") {
    Tensor p({4}), g({4}, std::vector<double>{0.3, -7.0, 1e-3, -0.02});
    AdamState st;
    Tensor* ps[] = {&p};
    const Tensor* gs[] = {&g};
    adam_step(ps, gs, st);
    for (std::size_t i = 0; i < 4; ++i) CHECK(p[i] == doctest::Approx(-st.lr * (g[i] > 0 ? 1 : -1)).epsilon(1e-4));
  }

  TEST_CASE("two steps match a scalar reference") {
    const double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double g = 0.25;
    double x = 0.7, m = 0, v = 0;
    for (int t = 1; t <= 2; ++t) {
      m = b1 * m + (1 - b1) * g;
      v = b2 * v + (1 - b2) * g * g;
      const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
      x -= lr * mh / (std::sqrt(vh) + eps);
    }
    Tensor p({1}, 0.7), gr({1}, g);
    AdamState st;
    Tensor* ps[] = {&p};
    const Tensor* gs[] = {&gr};
    adam_step(ps, gs, st);
    adam_step(ps, gs, st);
    CHECK(p[0] == doctest::Approx(x).epsilon(1e-14));
  }

  TEST_CASE("shape mismatch is rejected") {
    Tensor p({3}), g({4});
    AdamState st;
    Tensor* ps[] = {&p};
    const Tensor* gs[] = {&g};
    CHECK_THROWS_AS(adam_step(ps, gs, st), ShapeError);
  }
}

TEST_SUITE("serialize") {
  Network tiny(std::uint64_t seed) {
    std::vector<Sequential> branches;
    branches.emplace_back(std::vector<LayerSpec>{LayerSpec::conv2d(1, 2), LayerSpec::relu(), LayerSpec::maxpool2d()});
    Sequential head(std::vector<LayerSpec>{LayerSpec::dense(2, 1), LayerSpec::sigmoid()});
    Network net(std::move(branches), std::move(head));
    Rng rng(seed);
    for (auto* p : net.parameters()) p->value = random_tensor(p->value.shape(), rng);
    return net;
  }

  TEST_CASE("round trip is bit exact") {
    const Network net = tiny(3);
    const std::string bytes = encode_model(net, 42, {{"note", "x"}});
    const ModelFile back = decode_model(bytes);
    CHECK(back.seed == 42);
    CHECK(back.metadata["note"] == "x");
    const auto a = net.parameters();
    const auto b = back.network.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value == b[i]->value);
    CHECK(encode_model(back.network, 42, {{"note", "x"}}) == bytes);
  }

  TEST_CASE("corrupt files are rejected") {
    const std::string bytes = encode_model(tiny(1), 1);
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_model(bad), std::runtime_error);
    bad = bytes;
    bad[8] = 9;
    CHECK_THROWS_AS(decode_model(bad), std::runtime_error);
    CHECK_THROWS_AS(decode_model(bytes.substr(0, bytes.size() - 8)), std::runtime_error);
    CHECK_THROWS_AS(decode_model(bytes + "x"), std::runtime_error);
    CHECK_THROWS_AS(decode_model(bytes.substr(0, 20)), std::runtime_error);
  }
}
