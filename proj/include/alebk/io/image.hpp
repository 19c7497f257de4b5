#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "alebk/tensor.hpp"

namespace alebk::io {

/// 8-bit PNG (gray or RGB, alpha dropped), binary PGM (P5) or PPM (P6),
/// chosen by extension. Pixels are divided by 255; gray images come back
/// H x W x 1.
Tensor read_image(const std::filesystem::path& path);

/// 1- or 3-channel tensor in [0, 1], rounded to 8 bits. The extension picks
/// the format (.png, .pgm for 1 channel, .ppm for 3).
void write_image(const std::filesystem::path& path, const Tensor& image);

bool is_image_file(const std::filesystem::path& path);

/// Number in the last run of digits of the file stem: "frame_0042.png" -> 42.
std::optional<std::size_t> frame_index_from_name(const std::filesystem::path& path);

}  // namespace alebk::io
