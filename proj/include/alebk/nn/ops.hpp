#pragma once

// Stateless forward operators. The layer classes use the same code paths.

#include "alebk/tensor.hpp"

namespace alebk::nn {

/// 3x3 zero-padded convolution. input H x W x Cin, kernels 3 x 3 x Cin x Cout,
/// bias Cout; output H x W x Cout.
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias);

/// 2x2 window, stride 2, odd trailing row/column dropped.
Tensor maxpool2d_forward(const Tensor& input);

/// y = W x + b with W stored out x in. `input` may have any shape; it is
/// read as a flat vector.
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

/// Concatenation of the flattened inputs, in order.
Tensor concat_forward(std::span<const Tensor> inputs);

double relu(double x) noexcept;
/// Logistic function, clamped so the result is strictly inside (0, 1).
double sigmoid(double x) noexcept;
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

inline constexpr double kBceEpsilon = 1e-12;

/// Binary cross-entropy, log arguments clamped below at eps. Label must be 0 or 1.
double bce_loss(double p, int label);
/// dL/dp of bce_loss (zero where the clamp is active).
double bce_grad(double p, int label);

}  // namespace alebk::nn
