#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace focusfl {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Writes `contents` to a temporary sibling of `path`, then renames it over
/// `path` so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace focusfl
