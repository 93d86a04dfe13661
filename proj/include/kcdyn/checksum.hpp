#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace kcdyn {

/// Lowercase hex SHA-256 of a file's bytes. Throws std::runtime_error if unreadable.
std::string sha256_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a string.
std::string sha256_string(std::string_view data);

}  // namespace kcdyn
