#include "alebk/nn/network.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "alebk/nn/ops.hpp"

namespace alebk::nn {

Sequential::Sequential(const std::vector<LayerSpec>& specs) {
  for (const auto& s : specs) add(make_layer(s));
}

Sequential::Sequential(const Sequential& other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    auto layer = make_layer(other.layer(i).spec());
    auto dst = layer->parameters();
    auto src = other.layer(i).parameters();
    for (std::size_t p = 0; p < dst.size(); ++p) {
      dst[p].value = src[p].value;
      dst[p].grad = src[p].grad;
    }
    layer->set_input_gradient(other.layer(i).input_gradient());
    add(std::move(layer));
  }
}

Sequential& Sequential::operator=(const Sequential& other) {
  if (this != &other) *this = Sequential(other);
  return *this;
}

std::vector<LayerSpec> Sequential::specs() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers_) out.push_back(l->spec());
  return out;
}

Shape Sequential::output_shape(Shape input) const {
  for (const auto& l : layers_) input = l->output_shape(input);
  return input;
}

Tensor Sequential::forward(const Tensor& input, Mode mode, Rng* rng) {
  Tensor x = input;
  for (auto& l : layers_) x = l->forward(x, mode, rng);
  return x;
}

Tensor Sequential::infer(const Tensor& input) const {
  Tensor x = input;
  for (const auto& l : layers_) x = l->infer(x);
  return x;
}

Tensor Sequential::backward(const Tensor& grad_output, std::size_t end) {
  end = std::min(end, layers_.size());
  Tensor g = grad_output;
  for (std::size_t i = end; i-- > 0;) {
    g = layers_[i]->backward(g);
    if (g.empty() && i > 0) {
      throw std::logic_error("input gradients disabled on an inner layer");
    }
  }
  return g;
}

std::vector<Parameter*> Sequential::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    for (auto& p : l->parameters()) out.push_back(&p);
  }
  return out;
}

std::vector<const Parameter*> Sequential::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers_) {
    for (const auto& p : std::as_const(*l).parameters()) out.push_back(&p);
  }
  return out;
}

void Sequential::activation_pattern(std::vector<std::uint32_t>& out) const {
  for (const auto& l : layers_) l->activation_pattern(out);
}

// ---------------------------------------------------------------- Network

Network::Network(std::vector<Sequential> branches, Sequential head)
    : branches_(std::move(branches)), head_(std::move(head)) {
  if (branches_.empty()) throw std::invalid_argument("network needs at least one branch");
}

void Network::validate_inputs(std::span<const Tensor> inputs) const {
  if (inputs.size() != branches_.size()) {
    throw std::invalid_argument("network has " + std::to_string(branches_.size()) + " branches, got " +
                                std::to_string(inputs.size()) + " inputs");
  }
}

Tensor Network::join(std::vector<Tensor>& outs) const {
  if (outs.size() == 1) return std::move(outs[0]);
  return concat_forward(outs);
}

Tensor Network::forward(std::span<const Tensor> inputs, Mode mode, Rng* rng) {
  validate_inputs(inputs);
  std::vector<Tensor> outs;
  branch_shapes_.clear();
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    outs.push_back(branches_[b].forward(inputs[b], mode, rng));
    branch_shapes_.push_back(outs.back().shape());
  }
  return head_.forward(join(outs), mode, rng);
}

Tensor Network::infer(std::span<const Tensor> inputs) const {
  validate_inputs(inputs);
  std::vector<Tensor> outs;
  for (std::size_t b = 0; b < branches_.size(); ++b) outs.push_back(branches_[b].infer(inputs[b]));
  return head_.infer(join(outs));
}

namespace {

std::vector<Tensor> split_join_gradient(const Tensor& g, const std::vector<Shape>& shapes) {
  std::vector<Tensor> parts;
  std::size_t offset = 0;
  for (const auto& shape : shapes) {
    const std::size_t n = shape_size(shape);
    std::vector<double> d(g.values().begin() + offset, g.values().begin() + offset + n);
    offset += n;
    parts.emplace_back(shape, std::move(d));
  }
  return parts;
}

}  // namespace

std::vector<Tensor> Network::backward_from_join(const Tensor& grad_join) {
  std::vector<Tensor> parts;
  if (branches_.size() == 1) {
    parts.push_back(grad_join.reshaped(branch_shapes_[0]));
  } else {
    parts = split_join_gradient(grad_join, branch_shapes_);
  }
  std::vector<Tensor> input_grads;
  for (std::size_t b = 0; b < branches_.size(); ++b) input_grads.push_back(branches_[b].backward(parts[b]));
  return input_grads;
}

std::vector<Tensor> Network::backward(const Tensor& grad_output) {
  if (branch_shapes_.size() != branches_.size()) throw std::logic_error("network: backward called before forward");
  return backward_from_join(head_.backward(grad_output));
}

std::size_t Network::fused_sigmoid_end() const {
  if (head_.size() == 0 || head_.layer(head_.size() - 1).spec().kind != LayerKind::Sigmoid) {
    throw std::logic_error("loss_and_backward needs a network ending in a sigmoid");
  }
  return head_.size() - 1;
}

double Network::loss(std::span<const Tensor> inputs, int label, Mode mode, Rng* rng) {
  const Tensor out = forward(inputs, mode, rng);
  if (out.size() != 1) throw ShapeError("loss: expected a single output, got " + shape_string(out.shape()));
  return bce_loss(out[0], label);
}

double Network::loss_and_backward(std::span<const Tensor> inputs, int label, Mode mode, Rng* rng) {
  const std::size_t end = fused_sigmoid_end();
  const Tensor out = forward(inputs, mode, rng);
  if (out.size() != 1) throw ShapeError("loss: expected a single output, got " + shape_string(out.shape()));
  const double p = out[0];
  const double l = bce_loss(p, label);

  backward_from_join(head_.backward(Tensor({1}, {p - static_cast<double>(label)}), end));
  return l;
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  for (auto& b : branches_) {
    auto p = b.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  auto h = head_.parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

std::vector<const Parameter*> Network::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& b : branches_) {
    auto p = b.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  auto h = head_.parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

void Network::zero_grad() {
  for (auto* p : parameters()) p->grad.fill(0.0);
}

std::vector<std::uint32_t> Network::activation_pattern() const {
  std::vector<std::uint32_t> out;
  for (const auto& b : branches_) b.activation_pattern(out);
  head_.activation_pattern(out);
  return out;
}

}  // namespace alebk::nn
