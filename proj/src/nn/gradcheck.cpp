#include "alebk/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace alebk::nn {

void GradCheckReport::merge(const GradCheckReport& other) {
  checked += other.checked;
  skipped_nonsmooth += other.skipped_nonsmooth;
  if (other.checked > 0 && other.max_rel_error >= max_rel_error) {
    max_rel_error = other.max_rel_error;
    worst = other.worst;
  }
  tolerance = other.tolerance;
}

double relative_error(double analytic, double numeric, double floor) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

using Probe = std::function<std::pair<double, std::vector<std::uint32_t>>()>;

// Visits the coordinates of one tensor: all of them, or a random sample,
// replacing any coordinate that straddles a kink.
void check_tensor(const std::string& name, Tensor& value, const Tensor& analytic, const Probe& probe,
                  const std::vector<std::uint32_t>& base_pattern, const GradCheckOptions& opt, Rng& rng,
                  GradCheckReport& report) {
  const std::size_t n = value.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t wanted = n;
  if (opt.coords_per_tensor != 0 && opt.coords_per_tensor < n) {
    rng.shuffle(std::span<std::size_t>(order));
    wanted = opt.coords_per_tensor;
  }
  std::size_t done = 0;
  for (std::size_t k = 0; k < order.size() && done < wanted; ++k) {
    const std::size_t i = order[k];
    const double saved = value[i];
    value[i] = saved + opt.step;
    auto [lp, pp] = probe();
    value[i] = saved - opt.step;
    auto [lm, pm] = probe();
    value[i] = saved;
    if (pp != base_pattern || pm != base_pattern) {
      ++report.skipped_nonsmooth;
      continue;
    }
    const double numeric = (lp - lm) / (2.0 * opt.step);
    const double err = relative_error(analytic[i], numeric, opt.denominator_floor);
    ++report.checked;
    ++done;
    if (err >= report.max_rel_error) {
      report.max_rel_error = err;
      report.worst = {name, i, analytic[i], numeric, err};
    }
  }
}

}  // namespace

GradCheckReport check_network_gradients(Network& net, std::span<const Tensor> inputs, int label,
                                        const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;
  Rng rng(options.seed);

  // Draw dropout masks, then work entirely in replay mode.
  net.forward(inputs, Mode::Train, &rng);
  net.zero_grad();
  net.loss_and_backward(inputs, label, Mode::Replay, nullptr);
  const auto base = net.activation_pattern();

  Probe probe = [&] {
    const double l = net.loss(inputs, label, Mode::Replay, nullptr);
    return std::make_pair(l, net.activation_pattern());
  };

  auto params = net.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Tensor analytic = params[p]->grad;
    check_tensor("param" + std::to_string(p) + "." + params[p]->name, params[p]->value, analytic, probe, base,
                 options, rng, report);
  }
  return report;
}

GradCheckReport check_layer_gradients(Layer& layer, const Tensor& input, const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;
  Rng rng(options.seed);

  const Shape out_shape = layer.output_shape(input.shape());
  Tensor projection(out_shape);
  for (auto& w : projection.data()) w = rng.uniform(-1.0, 1.0);

  Tensor x = input;
  layer.forward(x, Mode::Train, &rng);
  for (auto& p : layer.parameters()) p.grad.fill(0.0);
  const bool saved_flag = layer.input_gradient();
  layer.set_input_gradient(true);
  layer.forward(x, Mode::Replay, nullptr);
  const Tensor grad_input = layer.backward(projection);
  std::vector<std::uint32_t> base;
  layer.activation_pattern(base);

  Probe probe = [&] {
    const Tensor y = layer.forward(x, Mode::Replay, nullptr);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += projection[i] * y[i];
    std::vector<std::uint32_t> pattern;
    layer.activation_pattern(pattern);
    return std::make_pair(l, pattern);
  };

  check_tensor("input", x, grad_input, probe, base, options, rng, report);
  for (auto& p : layer.parameters()) {
    const Tensor analytic = p.grad;
    check_tensor(p.name, p.value, analytic, probe, base, options, rng, report);
  }
  layer.set_input_gradient(saved_flag);
  return report;
}

}  // namespace alebk::nn
