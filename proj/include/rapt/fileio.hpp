#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rapt {

/// Writes through a sibling temp file and renames it into place. Throws
/// DataError carrying the path on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Lines without terminators ("\n" or "\r\n"); a leading UTF-8 BOM is dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace rapt
