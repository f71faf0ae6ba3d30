#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vsd {

// Whole-file helpers. Both throw Error(Io) on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Hex SHA-256 of a file's contents, logged by the CLI so runs can be reproduced.
std::string file_sha256(const std::filesystem::path& path);

}  // namespace vsd
