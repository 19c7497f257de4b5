#include "alebk/nn/layers.hpp"

#include <algorithm>
#include <stdexcept>

#include "alebk/nn/ops.hpp"
#include "alebk/simd/kernels.hpp"

namespace alebk::nn {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2D:
      return "conv2d";
    case LayerKind::MaxPool2D:
      return "maxpool2d";
    case LayerKind::ReLU:
      return "relu";
    case LayerKind::Dense:
      return "dense";
    case LayerKind::Sigmoid:
      return "sigmoid";
    case LayerKind::Dropout:
      return "dropout";
    case LayerKind::Concat:
      return "concat";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  for (auto k : {LayerKind::Conv2D, LayerKind::MaxPool2D, LayerKind::ReLU, LayerKind::Dense, LayerKind::Sigmoid,
                 LayerKind::Dropout, LayerKind::Concat}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown layer kind '" + name + "'");
}

void validate(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Conv2D:
    case LayerKind::Dense:
      if (spec.inputs == 0 || spec.units == 0) {
        throw std::invalid_argument(to_string(spec.kind) + ": input and unit counts must be positive");
      }
      break;
    case LayerKind::Dropout:
      if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
        throw std::invalid_argument("dropout: rate must lie in [0, 1), got " + std::to_string(spec.rate));
      }
      break;
    default:
      break;
  }
}

void Layer::require_cache(bool ok, const char* layer) const {
  if (!ok) throw std::logic_error(std::string(layer) + ": backward called before forward");
}

// ---------------------------------------------------------------- Conv2D

Conv2D::Conv2D(std::size_t in_channels, std::size_t filters) : in_channels_(in_channels), filters_(filters) {
  validate(LayerSpec::conv2d(in_channels, filters));
  params_.push_back({"kernel", Tensor({3, 3, in_channels, filters}), Tensor({3, 3, in_channels, filters})});
  params_.push_back({"bias", Tensor({filters}), Tensor({filters})});
}

LayerSpec Conv2D::spec() const { return LayerSpec::conv2d(in_channels_, filters_); }

Shape Conv2D::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[2] != in_channels_) {
    throw ShapeError("conv2d: expected H x W x " + std::to_string(in_channels_) + " input, got " + shape_string(input));
  }
  return {input[0], input[1], filters_};
}

Tensor Conv2D::forward(const Tensor& input, Mode, Rng*) {
  Tensor out = conv2d_forward(input, params_[0].value, params_[1].value);
  input_ = input;
  cached_ = true;
  return out;
}

Tensor Conv2D::infer(const Tensor& input) const { return conv2d_forward(input, params_[0].value, params_[1].value); }

Tensor Conv2D::backward(const Tensor& grad_output) {
  require_cache(cached_, "conv2d");
  const std::size_t H = input_.dim(0), W = input_.dim(1);
  require_shape(grad_output, {H, W, filters_}, "conv2d grad_output");
  const auto& k = simd::active();
  k.conv3x3_weight_grad({H, W, in_channels_, filters_}, input_.raw(), grad_output.raw(), params_[0].grad.raw(),
                        params_[1].grad.raw());
  if (!input_grad_) return {};

  // dL/d(input) is a same-padded convolution of grad_output with the kernel
  // rotated by 180 degrees and its channel axes swapped.
  const Tensor& kern = params_[0].value;
  Tensor flipped({3, 3, filters_, in_channels_});
  for (std::size_t ky = 0; ky < 3; ++ky) {
    for (std::size_t kx = 0; kx < 3; ++kx) {
      const double* src = kern.raw() + ((2 - ky) * 3 + (2 - kx)) * in_channels_ * filters_;
      double* dst = flipped.raw() + (ky * 3 + kx) * filters_ * in_channels_;
      for (std::size_t ci = 0; ci < in_channels_; ++ci) {
        for (std::size_t co = 0; co < filters_; ++co) dst[co * in_channels_ + ci] = src[ci * filters_ + co];
      }
    }
  }
  Tensor grad_input({H, W, in_channels_});
  k.conv3x3_same({H, W, filters_, in_channels_}, grad_output.raw(), flipped.raw(), nullptr, grad_input.raw());
  return grad_input;
}

// ------------------------------------------------------------- MaxPool2D

Shape MaxPool2D::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] < 2 || input[1] < 2) {
    throw ShapeError("maxpool2d: input must be H x W x C with H, W >= 2, got " + shape_string(input));
  }
  return {input[0] / 2, input[1] / 2, input[2]};
}

Tensor MaxPool2D::forward(const Tensor& input, Mode, Rng*) {
  const Shape os = output_shape(input.shape());
  const std::size_t W = input.dim(1), C = input.dim(2);
  Tensor out(os);
  argmax_.assign(out.size(), 0);
  std::size_t o = 0;
  for (std::size_t y = 0; y < os[0]; ++y) {
    for (std::size_t x = 0; x < os[1]; ++x) {
      for (std::size_t c = 0; c < C; ++c, ++o) {
        std::size_t best = ((2 * y) * W + 2 * x) * C + c;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = ((2 * y + dy) * W + 2 * x + dx) * C + c;
            if (input[idx] > input[best]) best = idx;
          }
        }
        argmax_[o] = static_cast<std::uint32_t>(best);
        out[o] = input[best];
      }
    }
  }
  input_shape_ = input.shape();
  cached_ = true;
  return out;
}

Tensor MaxPool2D::infer(const Tensor& input) const { return maxpool2d_forward(input); }

Tensor MaxPool2D::backward(const Tensor& grad_output) {
  require_cache(cached_, "maxpool2d");
  require_shape(grad_output, output_shape(input_shape_), "maxpool2d grad_output");
  if (!input_grad_) return {};
  Tensor grad_input(input_shape_);
  for (std::size_t o = 0; o < argmax_.size(); ++o) grad_input[argmax_[o]] += grad_output[o];
  return grad_input;
}

void MaxPool2D::activation_pattern(std::vector<std::uint32_t>& out) const {
  out.insert(out.end(), argmax_.begin(), argmax_.end());
}

// ------------------------------------------------------------------ ReLU

Tensor ReLU::forward(const Tensor& input, Mode, Rng*) {
  Tensor out = input;
  active_.assign(input.size(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] > 0.0) {
      active_[i] = 1;
    } else {
      out[i] = 0.0;
    }
  }
  cached_ = true;
  return out;
}

Tensor ReLU::infer(const Tensor& input) const { return relu(input); }

Tensor ReLU::backward(const Tensor& grad_output) {
  require_cache(cached_, "relu");
  if (grad_output.size() != active_.size()) {
    throw ShapeError("relu: grad_output " + shape_string(grad_output.shape()) + " does not match cached activation");
  }
  if (!input_grad_) return {};
  Tensor g = grad_output;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!active_[i]) g[i] = 0.0;
  }
  return g;
}

void ReLU::activation_pattern(std::vector<std::uint32_t>& out) const {
  out.insert(out.end(), active_.begin(), active_.end());
}

// ----------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_features, std::size_t units) : in_features_(in_features), units_(units) {
  validate(LayerSpec::dense(in_features, units));
  params_.push_back({"weight", Tensor({units, in_features}), Tensor({units, in_features})});
  params_.push_back({"bias", Tensor({units}), Tensor({units})});
}

LayerSpec Dense::spec() const { return LayerSpec::dense(in_features_, units_); }

Shape Dense::output_shape(const Shape& input) const {
  if (shape_size(input) != in_features_) {
    throw ShapeError("dense: expected " + std::to_string(in_features_) + " input values, got " + shape_string(input));
  }
  return {units_};
}

Tensor Dense::forward(const Tensor& input, Mode, Rng*) {
  Tensor out = dense_forward(input, params_[0].value, params_[1].value);
  input_ = input;
  cached_ = true;
  return out;
}

Tensor Dense::infer(const Tensor& input) const { return dense_forward(input, params_[0].value, params_[1].value); }

Tensor Dense::backward(const Tensor& grad_output) {
  require_cache(cached_, "dense");
  require_shape(grad_output, {units_}, "dense grad_output");
  const auto& k = simd::active();
  const Tensor& w = params_[0].value;
  Tensor& gw = params_[0].grad;
  Tensor& gb = params_[1].grad;
  for (std::size_t o = 0; o < units_; ++o) {
    gb[o] += grad_output[o];
    k.axpy(in_features_, grad_output[o], input_.raw(), gw.raw() + o * in_features_);
  }
  if (!input_grad_) return {};
  Tensor grad_input(input_.shape());
  for (std::size_t o = 0; o < units_; ++o) {
    k.axpy(in_features_, grad_output[o], w.raw() + o * in_features_, grad_input.raw());
  }
  return grad_input;
}

// --------------------------------------------------------------- Sigmoid

Tensor Sigmoid::forward(const Tensor& input, Mode, Rng*) {
  output_ = sigmoid(input);
  cached_ = true;
  return output_;
}

Tensor Sigmoid::infer(const Tensor& input) const { return sigmoid(input); }

Tensor Sigmoid::backward(const Tensor& grad_output) {
  require_cache(cached_, "sigmoid");
  require_shape(grad_output, output_.shape(), "sigmoid grad_output");
  if (!input_grad_) return {};
  Tensor g = grad_output;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= output_[i] * (1.0 - output_[i]);
  return g;
}

// --------------------------------------------------------------- Dropout

Dropout::Dropout(double rate) : rate_(rate) { validate(LayerSpec::dropout(rate)); }

Tensor Dropout::forward(const Tensor& input, Mode mode, Rng* rng) {
  if (mode == Mode::Inference) {
    mask_.assign(input.size(), 1.0);
    cached_ = true;
    return input;
  }
  if (mode == Mode::Train || mask_.size() != input.size()) {
    if (!rng) throw std::invalid_argument("dropout: training mode needs a random generator");
    const double keep = 1.0 - rate_;
    const double scale = 1.0 / keep;
    mask_.resize(input.size());
    for (auto& m : mask_) m = rng->bernoulli(keep) ? scale : 0.0;
  }
  Tensor out = input;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask_[i];
  cached_ = true;
  return out;
}

Tensor Dropout::backward(const Tensor& grad_output) {
  require_cache(cached_, "dropout");
  if (grad_output.size() != mask_.size()) {
    throw ShapeError("dropout: grad_output " + shape_string(grad_output.shape()) + " does not match mask");
  }
  if (!input_grad_) return {};
  Tensor g = grad_output;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask_[i];
  return g;
}

std::unique_ptr<Layer> make_layer(const LayerSpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case LayerKind::Conv2D:
      return std::make_unique<Conv2D>(spec.inputs, spec.units);
    case LayerKind::MaxPool2D:
      return std::make_unique<MaxPool2D>();
    case LayerKind::ReLU:
      return std::make_unique<ReLU>();
    case LayerKind::Dense:
      return std::make_unique<Dense>(spec.inputs, spec.units);
    case LayerKind::Sigmoid:
      return std::make_unique<Sigmoid>();
    case LayerKind::Dropout:
      return std::make_unique<Dropout>(spec.rate);
    case LayerKind::Concat:
      break;
  }
  throw std::invalid_argument("concat is a network join, not a sequential layer");
}

}  // namespace alebk::nn
