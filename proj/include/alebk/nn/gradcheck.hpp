#pragma once

// Central finite-difference verification of analytic gradients.
//
// ReLU and max-pooling make the loss piecewise smooth. A coordinate whose
// +h or -h perturbation moves the network into a different linear region
// (a ReLU changes sign or a pooling argmax moves) does not have a valid
// finite-difference estimate at that step size; such coordinates are
// counted as `skipped_nonsmooth` and replaced by another random coordinate.

#include <cstdint>
#include <span>
#include <string>

#include "alebk/nn/network.hpp"

namespace alebk::nn {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Lower bound on the relative-error denominator, so coordinates whose
  /// true gradient is ~0 are compared in absolute terms.
  double denominator_floor = 1e-7;
  /// 0 checks every coordinate.
  std::size_t coords_per_tensor = 0;
  std::uint64_t seed = 1;
};

struct GradCheckEntry {
  std::string tensor;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::size_t checked = 0;
  std::size_t skipped_nonsmooth = 0;
  double max_rel_error = 0.0;
  GradCheckEntry worst;
  double tolerance = 0.0;

  bool passed() const noexcept { return checked > 0 && max_rel_error < tolerance; }
  void merge(const GradCheckReport& other);
};

double relative_error(double analytic, double numeric, double floor) noexcept;

/// Checks d(BCE loss)/d(parameter) for a sigmoid-output network. Dropout
/// masks are drawn once and held fixed.
GradCheckReport check_network_gradients(Network& net, std::span<const Tensor> inputs, int label,
                                        const GradCheckOptions& options = {});

/// Checks one layer against L = sum(w * layer(x)) for a random projection
/// w, covering both the input gradient and every parameter gradient.
GradCheckReport check_layer_gradients(Layer& layer, const Tensor& input, const GradCheckOptions& options = {});

}  // namespace alebk::nn
