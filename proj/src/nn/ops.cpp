#include "alebk/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "alebk/simd/kernels.hpp"

namespace alebk::nn {

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  if (input.rank() != 3) {
    throw ShapeError("conv2d: input must be H x W x C, got " + shape_string(input.shape()));
  }
  if (kernels.rank() != 4 || kernels.dim(0) != 3 || kernels.dim(1) != 3) {
    throw ShapeError("conv2d: kernels must be 3 x 3 x Cin x Cout, got " + shape_string(kernels.shape()));
  }
  if (kernels.dim(2) != input.dim(2)) {
    throw ShapeError("conv2d: kernels " + shape_string(kernels.shape()) + " do not match input " +
                     shape_string(input.shape()));
  }
  require_shape(bias, {kernels.dim(3)}, "conv2d bias");
  const simd::Conv3x3Geometry g{input.dim(0), input.dim(1), input.dim(2), kernels.dim(3)};
  Tensor out({g.height, g.width, g.out_channels});
  simd::active().conv3x3_same(g, input.raw(), kernels.raw(), bias.raw(), out.raw());
  return out;
}

Tensor maxpool2d_forward(const Tensor& input) {
  if (input.rank() != 3 || input.dim(0) < 2 || input.dim(1) < 2) {
    throw ShapeError("maxpool2d: input must be H x W x C with H, W >= 2, got " + shape_string(input.shape()));
  }
  const std::size_t H = input.dim(0) / 2, W = input.dim(1) / 2, C = input.dim(2);
  Tensor out({H, W, C});
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      for (std::size_t c = 0; c < C; ++c) {
        double m = input.at(2 * y, 2 * x, c);
        m = std::max(m, input.at(2 * y, 2 * x + 1, c));
        m = std::max(m, input.at(2 * y + 1, 2 * x, c));
        m = std::max(m, input.at(2 * y + 1, 2 * x + 1, c));
        out.at(y, x, c) = m;
      }
    }
  }
  return out;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2) {
    throw ShapeError("dense: weights must be out x in, got " + shape_string(weights.shape()));
  }
  const std::size_t out_n = weights.dim(0), in_n = weights.dim(1);
  if (input.size() != in_n) {
    throw ShapeError("dense: input " + shape_string(input.shape()) + " has " + std::to_string(input.size()) +
                     " values, weights " + shape_string(weights.shape()) + " expect " + std::to_string(in_n));
  }
  require_shape(bias, {out_n}, "dense bias");
  const auto& k = simd::active();
  Tensor out({out_n});
  for (std::size_t o = 0; o < out_n; ++o) out[o] = k.dot(weights.raw() + o * in_n, input.raw(), in_n) + bias[o];
  return out;
}

Tensor concat_forward(std::span<const Tensor> inputs) {
  std::size_t total = 0;
  for (const auto& t : inputs) total += t.size();
  if (total == 0) throw ShapeError("concat: no input values");
  std::vector<double> data;
  data.reserve(total);
  for (const auto& t : inputs) data.insert(data.end(), t.values().begin(), t.values().end());
  return Tensor({total}, std::move(data));
}

double relu(double x) noexcept { return x > 0.0 ? x : 0.0; }

double sigmoid(double x) noexcept {
  double p;
  if (x >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    p = e / (1.0 + e);
  }
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - 0x1.0p-53;
  return std::clamp(p, lo, hi);
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (auto& v : out.data()) v = relu(v);
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out = x;
  for (auto& v : out.data()) v = sigmoid(v);
  return out;
}

namespace {
void check_label(int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("bce: label must be 0 or 1, got " + std::to_string(label));
}
}  // namespace

// The clamp is applied to the argument of the logarithm, so a prediction
// exactly equal to its label costs exactly zero.
double bce_loss(double p, int label) {
  check_label(label);
  return label == 1 ? -std::log(std::max(p, kBceEpsilon)) : -std::log(std::max(1.0 - p, kBceEpsilon));
}

double bce_grad(double p, int label) {
  check_label(label);
  if (label == 1) return p >= kBceEpsilon ? -1.0 / p : 0.0;
  return 1.0 - p >= kBceEpsilon ? 1.0 / (1.0 - p) : 0.0;
}

}  // namespace alebk::nn
