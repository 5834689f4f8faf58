#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cocotree {

std::string sha256_hex(std::string_view data);

// Digest of a file's raw bytes. Throws invalid_input if unreadable.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace cocotree
