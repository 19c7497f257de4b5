#pragma once

// Model container, version 1:
//
//   offset  size  field
//   0       8     magic "ALEBKNN\0"
//   8       4     format version (uint32, little-endian)
//   12      4     reserved, zero
//   16      8     PRNG seed (uint64, little-endian)
//   24      8     header length N (uint64, little-endian)
//   32      N     UTF-8 JSON header: layer specs, tensor names and shapes,
//                 free-form metadata
//   32+N    ...   parameter tensors as little-endian IEEE-754 doubles, in
//                 header order
//
// Doubles are copied bit for bit, so save/load is exact.

#include <cstdint>
#include <string>
#include <string_view>

#include "alebk/nn/network.hpp"
#include "json.hpp"

namespace alebk::nn {

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct ModelFile {
  Network network;
  std::uint64_t seed = 0;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json spec_to_json(const LayerSpec& spec);
LayerSpec spec_from_json(const nlohmann::json& j);

std::string encode_model(const Network& net, std::uint64_t seed, const nlohmann::json& metadata = nlohmann::json::object());
/// Throws std::runtime_error on a bad magic, unsupported version, truncated
/// payload or a header that does not describe the payload.
ModelFile decode_model(std::string_view bytes);

}  // namespace alebk::nn
