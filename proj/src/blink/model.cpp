#include "alebk/blink/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "alebk/nn/adam.hpp"
#include "alebk/nn/rng.hpp"
#include "alebk/nn/serialize.hpp"

namespace alebk::blink {

using nn::LayerKind;
using nn::LayerSpec;

std::string to_string(Spectrum s) { return s == Spectrum::NIR ? "NIR" : "RGB"; }

Spectrum spectrum_from_string(std::string_view s) {
  if (s == "RGB" || s == "rgb") return Spectrum::RGB;
  if (s == "NIR" || s == "nir") return Spectrum::NIR;
  throw std::invalid_argument("unknown spectrum '" + std::string(s) + "' (expected RGB or NIR)");
}

void validate_crop(const Tensor& crop, const char* which) {
  require_shape(crop, {kCropSize, kCropSize, kCropChannels}, which);
  for (double v : crop.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(which) + ": pixel values must lie in [0, 1]");
    }
  }
}

std::vector<LayerSpec> branch_specs() {
  return {LayerSpec::conv2d(3, 32),  LayerSpec::relu(), LayerSpec::maxpool2d(),
          LayerSpec::conv2d(32, 32), LayerSpec::relu(), LayerSpec::maxpool2d(),
          LayerSpec::conv2d(32, 64), LayerSpec::relu(), LayerSpec::maxpool2d()};
}

std::vector<LayerSpec> head_specs() {
  return {LayerSpec::dense(2 * 6 * 6 * 64, 64), LayerSpec::relu(), LayerSpec::dropout(0.5), LayerSpec::dense(64, 1),
          LayerSpec::sigmoid()};
}

namespace {

void init_uniform(Tensor& t, double limit, nn::Rng& rng) {
  for (auto& v : t.data()) v = rng.uniform(-limit, limit);
}

void init_sequential(nn::Sequential& seq, nn::Rng& rng) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    auto& layer = seq.layer(i);
    const LayerSpec s = layer.spec();
    if (s.kind != LayerKind::Conv2D && s.kind != LayerKind::Dense) continue;
    auto params = layer.parameters();
    const double fan_in = s.kind == LayerKind::Conv2D ? 9.0 * static_cast<double>(s.inputs)
                                                      : static_cast<double>(s.inputs);
    const double fan_out = s.kind == LayerKind::Conv2D ? 9.0 * static_cast<double>(s.units)
                                                       : static_cast<double>(s.units);
    // Layers feeding the sigmoid get Glorot; everything else feeds a ReLU.
    const bool feeds_sigmoid = i + 1 < seq.size() && seq.layer(i + 1).spec().kind == LayerKind::Sigmoid;
    const double limit = feeds_sigmoid ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
    init_uniform(params[0].value, limit, rng);
    params[1].value.fill(0.0);
  }
}

void check_architecture(const nn::Network& net) {
  auto fail = [](const std::string& why) { throw std::runtime_error("not a two-branch blink model: " + why); };
  if (net.branch_count() != 2) fail("expected 2 branches, got " + std::to_string(net.branch_count()));
  for (std::size_t b = 0; b < 2; ++b) {
    if (net.branch(b).specs() != branch_specs()) fail("branch " + std::to_string(b) + " layers differ");
  }
  if (net.head().specs() != head_specs()) fail("head layers differ");
}

}  // namespace

BlinkModel::BlinkModel(nn::Network net, std::uint64_t seed) : net_(std::move(net)), seed_(seed) {
  for (std::size_t b = 0; b < net_.branch_count(); ++b) net_.branch(b).layer(0).set_input_gradient(false);
}

BlinkModel BlinkModel::build(std::uint64_t seed) {
  std::vector<nn::Sequential> branches;
  branches.emplace_back(branch_specs());
  branches.emplace_back(branch_specs());
  nn::Network net(std::move(branches), nn::Sequential(head_specs()));
  nn::Rng rng(seed);
  init_sequential(net.branch(0), rng);
  init_sequential(net.branch(1), rng);
  init_sequential(net.head(), rng);
  return BlinkModel(std::move(net), seed);
}

BlinkModel BlinkModel::from_network(nn::Network net, std::uint64_t seed) {
  check_architecture(net);
  return BlinkModel(std::move(net), seed);
}

BlinkModel BlinkModel::decode(std::string_view bytes) {
  auto file = nn::decode_model(bytes);
  return from_network(std::move(file.network), file.seed);
}

std::string BlinkModel::encode() const {
  return nn::encode_model(net_, seed_, {{"model", "two-branch blink detector"}, {"input", {50, 50, 3}}});
}

double BlinkModel::predict(const Tensor& left, const Tensor& right) const {
  validate_crop(left, "left crop");
  validate_crop(right, "right crop");
  const Tensor inputs[2] = {left, right};
  return net_.infer(inputs)[0];
}

std::vector<double> BlinkModel::predict_batch(std::span<const EyePairSample> samples) const {
  std::vector<double> scores(samples.size());
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(samples.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) scores[i] = predict(samples[i].left, samples[i].right);
    return scores;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < samples.size(); i += workers) {
          scores[i] = predict(samples[i].left, samples[i].right);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return scores;
}

BlinkModel build_model(std::uint64_t seed) { return BlinkModel::build(seed); }

double predict(const BlinkModel& model, const Tensor& left, const Tensor& right) {
  return model.predict(left, right);
}

double accuracy(const BlinkModel& model, std::span<const EyePairSample> samples) {
  if (samples.empty()) throw std::invalid_argument("accuracy: no samples");
  const auto scores = model.predict_batch(samples);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int predicted = scores[i] > 0.5 ? 1 : 0;
    if (predicted == samples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainResult train(BlinkModel& model, std::span<const EyePairSample> samples, const TrainConfig& config) {
  if (config.epochs == 0) throw std::invalid_argument("train: epochs must be >= 1");
  if (config.batch_size == 0) throw std::invalid_argument("train: batch size must be >= 1");
  std::size_t positives = 0;
  for (const auto& s : samples) {
    validate_crop(s.left, "left crop");
    validate_crop(s.right, "right crop");
    if (s.label != 0 && s.label != 1) throw std::invalid_argument("train: labels must be 0 or 1");
    positives += static_cast<std::size_t>(s.label);
  }
  if (positives == 0 || positives == samples.size()) {
    throw std::invalid_argument("train: need at least one sample of each class");
  }

  auto& net = model.network();
  auto params = net.parameters();
  nn::AdamState adam;
  adam.lr = config.learning_rate;
  nn::Rng order_rng(config.seed);
  nn::Rng dropout_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      net.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = samples[order[k]];
        const Tensor inputs[2] = {s.left, s.right};
        loss_sum += net.loss_and_backward(inputs, s.label, nn::Mode::Train, &dropout_rng);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto* p : params) {
        for (auto& g : p->grad.data()) g *= scale;
      }
      nn::adam_step(params, adam);
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(samples.size()), accuracy(model, samples)};
    result.history.push_back(stats);

    if (config.target_accuracy && stats.accuracy >= *config.target_accuracy) {
      result.stop_reason = "target accuracy reached";
      break;
    }
    if (stats.loss < best_loss) {
      best_loss = stats.loss;
      stale = 0;
    } else if (config.patience > 0 && ++stale >= config.patience) {
      result.stop_reason = "loss plateau";
      break;
    }
  }
  if (result.stop_reason.empty()) result.stop_reason = "epoch limit";
  for (const auto* p : params) {
    if (!p->value.all_finite()) throw std::runtime_error("train: parameters became non-finite");
  }
  return result;
}

}  // namespace alebk::blink
