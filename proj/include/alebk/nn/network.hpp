#pragma once

#include <memory>
#include <vector>

#include "alebk/nn/layers.hpp"

namespace alebk::nn {

class Sequential {
 public:
  Sequential() = default;
  explicit Sequential(const std::vector<LayerSpec>& specs);

  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;
  Sequential(const Sequential& other);
  Sequential& operator=(const Sequential& other);

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }
  std::vector<LayerSpec> specs() const;

  Shape output_shape(Shape input) const;
  Tensor forward(const Tensor& input, Mode mode, Rng* rng);
  Tensor infer(const Tensor& input) const;
  /// Back-propagates through layers [0, end) in reverse; end defaults to all.
  Tensor backward(const Tensor& grad_output, std::size_t end = static_cast<std::size_t>(-1));

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void activation_pattern(std::vector<std::uint32_t>& out) const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Parallel branches whose flattened outputs are concatenated and fed to a
/// head. A single branch with an empty head is a plain sequential model.
class Network {
 public:
  Network() = default;
  Network(std::vector<Sequential> branches, Sequential head);

  std::size_t branch_count() const noexcept { return branches_.size(); }
  Sequential& branch(std::size_t i) { return branches_.at(i); }
  const Sequential& branch(std::size_t i) const { return branches_.at(i); }
  Sequential& head() noexcept { return head_; }
  const Sequential& head() const noexcept { return head_; }

  Tensor forward(std::span<const Tensor> inputs, Mode mode, Rng* rng);
  Tensor infer(std::span<const Tensor> inputs) const;
  /// Input gradient per branch (empty where the first layer has input
  /// gradients disabled).
  std::vector<Tensor> backward(const Tensor& grad_output);

  /// Forward + binary cross-entropy + backward for a single-output network
  /// ending in a sigmoid. Uses the fused sigmoid/BCE derivative p - y.
  /// Gradients accumulate into the parameters; returns the loss.
  double loss_and_backward(std::span<const Tensor> inputs, int label, Mode mode, Rng* rng);
  /// Loss only, same forward semantics as loss_and_backward.
  double loss(std::span<const Tensor> inputs, int label, Mode mode, Rng* rng);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();
  std::vector<std::uint32_t> activation_pattern() const;

 private:
  Tensor join(std::vector<Tensor>& outs) const;
  void validate_inputs(std::span<const Tensor> inputs) const;
  std::size_t fused_sigmoid_end() const;
  std::vector<Tensor> backward_from_join(const Tensor& grad_join);

  std::vector<Sequential> branches_;
  Sequential head_;
  std::vector<Shape> branch_shapes_;
};

}  // namespace alebk::nn
