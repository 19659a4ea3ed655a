#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace chunkbench::io {

// Throws IoError.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over path, so readers never
// observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace chunkbench::io
