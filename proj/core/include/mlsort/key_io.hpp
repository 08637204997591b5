#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>

#include "mlsort/keys.hpp"

namespace mlsort {

// text: one decimal double per line (shortest round-trip form on output).
// raw:  flat little-endian IEEE-754 binary64 stream, 8 bytes per key.
enum class KeyFormat { Text, Raw };

KeyFormat parse_key_format(std::string_view name);

// Throws IoError (with the path) on open/read failures and malformed
// records. Non-finite values are returned as-is; callers validate.
KeyVector read_keys(const std::filesystem::path& path, KeyFormat format);
void write_keys(const std::filesystem::path& path, std::span<const double> keys,
                KeyFormat format);

// Little-endian packing shared by the raw key format and index files.
void append_le64(std::string& out, double value);
double load_le64(const unsigned char* bytes) noexcept;

}  // namespace mlsort
