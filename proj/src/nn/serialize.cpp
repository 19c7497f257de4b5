#include "alebk/nn/serialize.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace alebk::nn {

namespace {

constexpr char kMagic[8] = {'A', 'L', 'E', 'B', 'K', 'N', 'N', '\0'};

template <class T>
T byteswap_if_needed(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::string& out, T v) {
  v = byteswap_if_needed(v);
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <class T>
T get(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw std::runtime_error("model file truncated");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return byteswap_if_needed(v);
}

}  // namespace

nlohmann::json spec_to_json(const LayerSpec& spec) {
  nlohmann::json j;
  j["kind"] = to_string(spec.kind);
  switch (spec.kind) {
    case LayerKind::Conv2D:
      j["inputs"] = spec.inputs;
      j["units"] = spec.units;
      j["kernel"] = {3, 3};
      j["padding"] = "same";
      break;
    case LayerKind::Dense:
      j["inputs"] = spec.inputs;
      j["units"] = spec.units;
      break;
    case LayerKind::MaxPool2D:
      j["window"] = {2, 2};
      j["stride"] = 2;
      break;
    case LayerKind::Dropout:
      j["rate"] = spec.rate;
      break;
    default:
      break;
  }
  return j;
}

LayerSpec spec_from_json(const nlohmann::json& j) {
  LayerSpec s;
  s.kind = layer_kind_from_string(j.at("kind").get<std::string>());
  switch (s.kind) {
    case LayerKind::Conv2D:
      if (j.value("padding", "same") != "same" || j.value("kernel", nlohmann::json::array({3, 3})) != nlohmann::json::array({3, 3})) {
        throw std::runtime_error("only 3x3 same-padded convolutions are supported");
      }
      [[fallthrough]];
    case LayerKind::Dense:
      s.inputs = j.at("inputs").get<std::size_t>();
      s.units = j.at("units").get<std::size_t>();
      break;
    case LayerKind::Dropout:
      s.rate = j.at("rate").get<double>();
      break;
    default:
      break;
  }
  validate(s);
  return s;
}

std::string encode_model(const Network& net, std::uint64_t seed, const nlohmann::json& metadata) {
  nlohmann::json header;
  header["branches"] = nlohmann::json::array();
  for (std::size_t b = 0; b < net.branch_count(); ++b) {
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& s : net.branch(b).specs()) specs.push_back(spec_to_json(s));
    header["branches"].push_back(specs);
  }
  header["join"] = "concat";
  header["head"] = nlohmann::json::array();
  for (const auto& s : net.head().specs()) header["head"].push_back(spec_to_json(s));
  header["tensors"] = nlohmann::json::array();
  const auto params = net.parameters();
  for (const auto* p : params) header["tensors"].push_back({{"name", p->name}, {"shape", p->value.shape()}});
  header["metadata"] = metadata;
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, 0);
  put<std::uint64_t>(out, seed);
  put<std::uint64_t>(out, text.size());
  out += text;
  for (const auto* p : params) {
    for (double v : p->value.values()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ModelFile decode_model(std::string_view bytes) {
  if (bytes.size() < 32 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not an ALEBK model file (bad magic)");
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kModelFormatVersion) {
    throw std::runtime_error("unsupported model format version " + std::to_string(version));
  }
  get<std::uint32_t>(bytes, pos);
  ModelFile file;
  file.seed = get<std::uint64_t>(bytes, pos);
  const auto header_len = get<std::uint64_t>(bytes, pos);
  if (pos + header_len > bytes.size()) throw std::runtime_error("model file truncated in header");
  const auto header = nlohmann::json::parse(bytes.substr(pos, header_len));
  pos += header_len;

  std::vector<Sequential> branches;
  for (const auto& b : header.at("branches")) {
    std::vector<LayerSpec> specs;
    for (const auto& s : b) specs.push_back(spec_from_json(s));
    branches.emplace_back(specs);
  }
  std::vector<LayerSpec> head_specs;
  for (const auto& s : header.at("head")) head_specs.push_back(spec_from_json(s));
  file.network = Network(std::move(branches), Sequential(head_specs));
  file.metadata = header.value("metadata", nlohmann::json::object());

  auto params = file.network.parameters();
  const auto& tensors = header.at("tensors");
  if (tensors.size() != params.size()) {
    throw std::runtime_error("model header lists " + std::to_string(tensors.size()) + " tensors, architecture has " +
                             std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto shape = tensors[i].at("shape").get<Shape>();
    if (shape != params[i]->value.shape()) {
      throw std::runtime_error("tensor " + std::to_string(i) + " shape " + shape_string(shape) +
                               " does not match architecture " + shape_string(params[i]->value.shape()));
    }
    for (auto& v : params[i]->value.data()) v = std::bit_cast<double>(get<std::uint64_t>(bytes, pos));
  }
  if (pos != bytes.size()) throw std::runtime_error("trailing bytes after model payload");
  return file;
}

}  // namespace alebk::nn
