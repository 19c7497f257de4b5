#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace alebk::io {

/// Thrown for unreadable, unwritable or malformed input files. The message
/// names the file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// see either the old contents or the complete new ones. Creates missing
/// parent directories.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

}  // namespace alebk::io
