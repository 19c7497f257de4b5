#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alebk/tensor.hpp"

namespace alebk::nn {

struct Parameter;

/// Adam hyperparameters plus first/second moment buffers. Buffers are
/// allocated on the first step to match the parameters they track.
struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One bias-corrected Adam update:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state);

/// Convenience overload taking value/grad pairs.
void adam_step(std::span<Parameter* const> params, AdamState& state);

}  // namespace alebk::nn
