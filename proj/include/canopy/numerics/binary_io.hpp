#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace canopy::io {

void write_f32_le(std::ostream& os, std::span<const float> values);
void read_f32_le(std::istream& is, std::span<float> out);
void write_u8(std::ostream& os, std::span<const std::uint8_t> values);
void read_u8(std::istream& is, std::span<std::uint8_t> out);

/// Writes `bytes` to a sibling temp file and renames it over `path`, so
/// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

/// Reads header lines up to and including a line equal to `terminator`.
/// Throws FormatError if the stream ends first.
std::vector<std::string> read_header_lines(std::istream& is, const std::string& terminator);

}  // namespace canopy::io
