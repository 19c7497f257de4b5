#include "alebk/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "alebk/nn/layers.hpp"

namespace alebk::nn {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam: " + std::to_string(params.size()) + " parameters but " + std::to_string(grads.size()) +
                     " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i]->shape()) {
      throw ShapeError("adam: parameter " + std::to_string(i) + " has shape " + shape_string(params[i]->shape()) +
                       " but gradient " + shape_string(grads[i]->shape()));
    }
  }
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(Tensor::zeros_like(*p));
      state.v.push_back(Tensor::zeros_like(*p));
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam: state tracks " + std::to_string(state.m.size()) + " tensors, got " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_shape(state.m[i], params[i]->shape(), "adam first moment");
    require_shape(state.v[i], params[i]->shape(), "adam second moment");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->raw();
    const double* g = grads[i]->raw();
    double* m = state.m[i].raw();
    double* v = state.v[i].raw();
    for (std::size_t j = 0, n = params[i]->size(); j < n; ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  std::vector<Tensor*> values;
  std::vector<const Tensor*> grads;
  for (auto* p : params) {
    values.push_back(&p->value);
    grads.push_back(&p->grad);
  }
  adam_step(values, grads, state);
}

}  // namespace alebk::nn
