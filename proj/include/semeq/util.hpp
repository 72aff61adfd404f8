#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace semeq {

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Splits on a separator and trims each piece; empty pieces are dropped.
std::vector<std::string> split_list(std::string_view s, char sep = ',');

// strtod-based parse, locale independent (dot decimal separator). Returns
// false if the field is not a complete floating point literal.
bool parse_double(std::string_view field, double& out);

// FNV-1a 64-bit over raw bytes; used for content hashes and checksums.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 1469598103934665603ULL);
std::uint64_t fnv1a64(std::string_view s,
                      std::uint64_t seed = 1469598103934665603ULL);

std::string read_text_file(const std::filesystem::path& path);

// Writes to "<path>.tmp" then renames, so readers never observe a partial
// file.
void atomic_write_file(const std::filesystem::path& path,
                       std::string_view contents);
void atomic_write_file(const std::filesystem::path& path,
                       const std::vector<unsigned char>& bytes);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

} // namespace semeq
