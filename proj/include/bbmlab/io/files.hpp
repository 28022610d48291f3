#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace bbm::io {

/// Lower-case hex SHA-256 of a byte buffer or of a file's contents.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames over the target.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

/// Whole-file read; throws Integrity when the file is missing or unreadable.
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double ("inf", "-inf", "nan" included).
std::string format_double(double v);
/// Strict parse of format_double output; throws InvalidInput.
double parse_double(std::string_view text);

}  // namespace bbm::io
