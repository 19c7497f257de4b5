#include "alebk/io/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <vector>

#include "alebk/io/files.hpp"

namespace alebk::io {

namespace fs = std::filesystem;

namespace {

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return e;
}

Tensor from_bytes(const unsigned char* px, std::size_t h, std::size_t w, std::size_t c) {
  Tensor t({h, w, c});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(px[i]) / 255.0;
  return t;
}

std::vector<unsigned char> to_bytes(const Tensor& image, const fs::path& path) {
  std::vector<unsigned char> px(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double v = image[i];
    if (!(v >= 0.0 && v <= 1.0)) throw IoError("write_image '" + path.string() + "': pixel outside [0, 1]");
    px[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  return px;
}

Tensor read_png(const fs::path& path) {
  const std::string bytes = read_file(path);
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw IoError("'" + path.string() + "': " + img.message);
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> px(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, px.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw IoError("'" + path.string() + "': " + msg);
  }
  return from_bytes(px.data(), img.height, img.width, color ? 3 : 1);
}

void write_png(const fs::path& path, const Tensor& image) {
  const auto px = to_bytes(image, path);
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.dim(1));
  img.height = static_cast<png_uint_32>(image.dim(0));
  img.format = image.dim(2) == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, px.data(), 0, nullptr)) {
    throw IoError("'" + path.string() + "': " + img.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, px.data(), 0, nullptr)) {
    throw IoError("'" + path.string() + "': " + img.message);
  }
  out.resize(size);
  atomic_write(path, out);
}

// Netpbm header: magic, width, height, maxval separated by whitespace, with
// '#' comments allowed, then one whitespace byte.
Tensor read_netpbm(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  const std::string magic = next_token();
  if (magic != "P5" && magic != "P6") throw IoError("'" + path.string() + "': only binary PGM (P5) and PPM (P6) are supported");
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(next_token());
    h = std::stoul(next_token());
    maxval = std::stoul(next_token());
  } catch (const std::exception&) {
    throw IoError("'" + path.string() + "': malformed header");
  }
  if (w == 0 || h == 0) throw IoError("'" + path.string() + "': zero image size");
  if (maxval != 255) throw IoError("'" + path.string() + "': only maxval 255 is supported");
  ++pos;
  const std::size_t c = magic == "P6" ? 3 : 1;
  if (bytes.size() < pos + w * h * c) throw IoError("'" + path.string() + "': truncated pixel data");
  return from_bytes(reinterpret_cast<const unsigned char*>(bytes.data()) + pos, h, w, c);
}

void write_netpbm(const fs::path& path, const Tensor& image, std::size_t channels) {
  const auto px = to_bytes(image, path);
  std::string out = (channels == 3 ? "P6\n" : "P5\n") + std::to_string(image.dim(1)) + " " +
                    std::to_string(image.dim(0)) + "\n255\n";
  out.append(reinterpret_cast<const char*>(px.data()), px.size());
  atomic_write(path, out);
}

}  // namespace

bool is_image_file(const fs::path& path) {
  const auto e = lower_ext(path);
  return e == ".png" || e == ".pgm" || e == ".ppm";
}

Tensor read_image(const fs::path& path) {
  const auto e = lower_ext(path);
  if (e == ".png") return read_png(path);
  if (e == ".pgm" || e == ".ppm") return read_netpbm(path);
  throw IoError("'" + path.string() + "': unsupported image format");
}

void write_image(const fs::path& path, const Tensor& image) {
  if (image.rank() != 3 || (image.dim(2) != 1 && image.dim(2) != 3)) {
    throw IoError("write_image '" + path.string() + "': expected H x W x 1 or H x W x 3, got " +
                  shape_string(image.shape()));
  }
  const auto e = lower_ext(path);
  if (e == ".png") return write_png(path, image);
  if (e == ".pgm" && image.dim(2) == 1) return write_netpbm(path, image, 1);
  if (e == ".ppm" && image.dim(2) == 3) return write_netpbm(path, image, 3);
  throw IoError("write_image '" + path.string() + "': extension does not match " + std::to_string(image.dim(2)) +
                " channel(s)");
}

std::optional<std::size_t> frame_index_from_name(const fs::path& path) {
  const std::string stem = path.stem().string();
  std::size_t end = stem.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
  if (end == 0) return std::nullopt;
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  try {
    return static_cast<std::size_t>(std::stoull(stem.substr(begin, end - begin)));
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

}  // namespace alebk::io
