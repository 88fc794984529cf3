#pragma once

#include <filesystem>
#include <string>

namespace litmt::io {

/// Whole-file read; throws std::runtime_error naming the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes bytes verbatim, creating parent directories as needed.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace litmt::io
