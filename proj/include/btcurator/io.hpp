#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace btcurator::io {

/// Reads the whole file; throws DataError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes to "<path>.tmp" and renames over `path`, so readers never observe
/// a partially written file.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::vector<std::string> split(std::string_view text, char sep);

}  // namespace btcurator::io
