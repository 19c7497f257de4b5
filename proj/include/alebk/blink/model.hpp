#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alebk/nn/network.hpp"
#include "alebk/tensor.hpp"

namespace alebk::blink {

inline constexpr std::size_t kCropSize = 50;
inline constexpr std::size_t kCropChannels = 3;
inline constexpr std::size_t kParameterCount = 352'321;

enum class Spectrum { RGB, NIR };

std::string to_string(Spectrum s);
Spectrum spectrum_from_string(std::string_view s);

/// Left and right eye crops, 50 x 50 x 3 in [0, 1]. Label 1 = closed (blink).
struct EyePairSample {
  Tensor left;
  Tensor right;
  int label = 0;
  std::string subject_id;
  Spectrum spectrum = Spectrum::RGB;
};

/// Throws ShapeError for a wrong shape and std::invalid_argument for pixel
/// values outside [0, 1].
void validate_crop(const Tensor& crop, const char* which);

/// Per branch: conv32-pool, conv32-pool, conv64-pool, each conv followed by ReLU.
std::vector<nn::LayerSpec> branch_specs();
/// dense64 + ReLU, dropout 0.5, dense1 + sigmoid, over the 2 x 2304 concat.
std::vector<nn::LayerSpec> head_specs();

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  /// Stop once the epoch loss has not improved for this many epochs; 0 disables.
  std::size_t patience = 10;
  /// Stop once inference-mode training accuracy reaches this value.
  std::optional<double> target_accuracy;
  std::uint64_t seed = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  /// Mean training-mode (dropout on) BCE over the epoch.
  double loss = 0.0;
  /// Inference-mode accuracy on the training samples after the epoch.
  double accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::string stop_reason;
};

class BlinkModel {
 public:
  /// Fresh model: He-uniform conv/dense-64 weights, Glorot-uniform output
  /// weights, zero biases, all drawn from `seed`.
  static BlinkModel build(std::uint64_t seed);
  /// Wraps a loaded network after checking it has the two-branch architecture.
  static BlinkModel from_network(nn::Network net, std::uint64_t seed);

  static BlinkModel decode(std::string_view bytes);
  std::string encode() const;

  /// Blink score in (0, 1): higher means more likely closed. Safe to call
  /// concurrently on a shared model.
  double predict(const Tensor& left, const Tensor& right) const;
  /// Scores in input order; evaluation fans out over hardware threads.
  std::vector<double> predict_batch(std::span<const EyePairSample> samples) const;

  nn::Network& network() noexcept { return net_; }
  const nn::Network& network() const noexcept { return net_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t parameter_count() const { return net_.parameter_count(); }

 private:
  BlinkModel(nn::Network net, std::uint64_t seed);

  nn::Network net_;
  std::uint64_t seed_ = 0;
};

BlinkModel build_model(std::uint64_t seed);

/// Mini-batch Adam on mean BCE. Needs both classes present and epochs >= 1.
TrainResult train(BlinkModel& model, std::span<const EyePairSample> samples, const TrainConfig& config);

double predict(const BlinkModel& model, const Tensor& left, const Tensor& right);

/// Fraction of samples whose score falls on the side of 0.5 matching the label.
double accuracy(const BlinkModel& model, std::span<const EyePairSample> samples);

}  // namespace alebk::blink
