#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace nashpricing {

// Shortest round-trip decimal, independent of the C locale.
std::string format_number(double value);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

// SHA-1 of "blob <size>\0<content>", the object id git would assign.
std::string git_blob_hash(std::string_view content);

}  // namespace nashpricing
