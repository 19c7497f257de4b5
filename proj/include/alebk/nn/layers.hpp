#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alebk/nn/rng.hpp"
#include "alebk/tensor.hpp"

namespace alebk::nn {

enum class LayerKind { Conv2D, MaxPool2D, ReLU, Dense, Sigmoid, Dropout, Concat };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

/// Serializable description of a layer. `inputs` is Cin for conv and the
/// flat input width for dense; `units` is the filter count or unit count.
struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::size_t inputs = 0;
  std::size_t units = 0;
  double rate = 0.0;

  static LayerSpec conv2d(std::size_t in_channels, std::size_t filters) {
    return {LayerKind::Conv2D, in_channels, filters, 0.0};
  }
  static LayerSpec dense(std::size_t in_features, std::size_t units) {
    return {LayerKind::Dense, in_features, units, 0.0};
  }
  static LayerSpec maxpool2d() { return {LayerKind::MaxPool2D, 0, 0, 0.0}; }
  static LayerSpec relu() { return {LayerKind::ReLU, 0, 0, 0.0}; }
  static LayerSpec sigmoid() { return {LayerKind::Sigmoid, 0, 0, 0.0}; }
  static LayerSpec dropout(double rate) { return {LayerKind::Dropout, 0, 0, rate}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Checks kind-specific invariants (dropout rate in [0,1), positive sizes).
void validate(const LayerSpec& spec);

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

enum class Mode {
  Inference,  // no masking
  Train,      // dropout draws a fresh mask
  Replay,     // dropout reuses the last mask; used for finite differences
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerSpec spec() const = 0;
  virtual Shape output_shape(const Shape& input) const = 0;

  /// Forward pass that caches what backward() needs.
  virtual Tensor forward(const Tensor& input, Mode mode, Rng* rng) = 0;
  /// Inference forward pass without touching any cached state.
  virtual Tensor infer(const Tensor& input) const = 0;
  /// Accumulates parameter gradients and returns dL/d(input). Returns an
  /// empty tensor when input gradients are disabled.
  virtual Tensor backward(const Tensor& grad_output) = 0;

  virtual std::span<Parameter> parameters() { return {}; }
  virtual std::span<const Parameter> parameters() const { return {}; }

  /// Appends the piecewise-linear region the last forward pass landed in
  /// (ReLU signs, pooling argmax). Finite differences are only valid when
  /// this is unchanged by the perturbation.
  virtual void activation_pattern(std::vector<std::uint32_t>& /*out*/) const {}

  void set_input_gradient(bool enabled) noexcept { input_grad_ = enabled; }
  bool input_gradient() const noexcept { return input_grad_; }

 protected:
  void require_cache(bool ok, const char* layer) const;

  bool input_grad_ = true;
};

class Conv2D final : public Layer {
 public:
  Conv2D(std::size_t in_channels, std::size_t filters);

  LayerSpec spec() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor infer(const Tensor& input) const override;
  Tensor backward(const Tensor& grad_output) override;
  std::span<Parameter> parameters() override { return params_; }
  std::span<const Parameter> parameters() const override { return params_; }

  Tensor& kernels() noexcept { return params_[0].value; }
  Tensor& bias() noexcept { return params_[1].value; }

 private:
  std::size_t in_channels_;
  std::size_t filters_;
  std::vector<Parameter> params_;
  Tensor input_;
  bool cached_ = false;
};

class MaxPool2D final : public Layer {
 public:
  LayerSpec spec() const override { return LayerSpec::maxpool2d(); }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor infer(const Tensor& input) const override;
  Tensor backward(const Tensor& grad_output) override;
  void activation_pattern(std::vector<std::uint32_t>& out) const override;

 private:
  Shape input_shape_;
  std::vector<std::uint32_t> argmax_;
  bool cached_ = false;
};

class ReLU final : public Layer {
 public:
  LayerSpec spec() const override { return LayerSpec::relu(); }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor infer(const Tensor& input) const override;
  Tensor backward(const Tensor& grad_output) override;
  void activation_pattern(std::vector<std::uint32_t>& out) const override;

 private:
  std::vector<std::uint8_t> active_;
  bool cached_ = false;
};

class Dense final : public Layer {
 public:
  Dense(std::size_t in_features, std::size_t units);

  LayerSpec spec() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor infer(const Tensor& input) const override;
  Tensor backward(const Tensor& grad_output) override;
  std::span<Parameter> parameters() override { return params_; }
  std::span<const Parameter> parameters() const override { return params_; }

  Tensor& weights() noexcept { return params_[0].value; }
  Tensor& bias() noexcept { return params_[1].value; }

 private:
  std::size_t in_features_;
  std::size_t units_;
  std::vector<Parameter> params_;
  Tensor input_;
  bool cached_ = false;
};

class Sigmoid final : public Layer {
 public:
  LayerSpec spec() const override { return LayerSpec::sigmoid(); }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor infer(const Tensor& input) const override;
  Tensor backward(const Tensor& grad_output) override;

 private:
  Tensor output_;
  bool cached_ = false;
};

/// Inverted dropout: kept units are scaled by 1/(1-rate) during training so
/// inference is a plain identity.
class Dropout final : public Layer {
 public:
  explicit Dropout(double rate);

  LayerSpec spec() const override { return LayerSpec::dropout(rate_); }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& input, Mode mode, Rng* rng) override;
  Tensor infer(const Tensor& input) const override { return input; }
  Tensor backward(const Tensor& grad_output) override;

  double rate() const noexcept { return rate_; }
  /// Scale factors from the last training pass (0 or 1/(1-rate)).
  const std::vector<double>& mask() const noexcept { return mask_; }

 private:
  double rate_;
  std::vector<double> mask_;
  bool cached_ = false;
};

std::unique_ptr<Layer> make_layer(const LayerSpec& spec);

}  // namespace alebk::nn
