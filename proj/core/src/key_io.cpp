#include "mlsort/key_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include "mlsort/error.hpp"

namespace mlsort {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return bytes;
}

void spill(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write error on '" + path.string() + "'");
}

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

}  // namespace

KeyFormat parse_key_format(std::string_view name) {
  if (name == "text") return KeyFormat::Text;
  if (name == "raw") return KeyFormat::Raw;
  throw ValidationError("unknown key format '" + std::string(name) + "' (expected text or raw)");
}

void append_le64(std::string& out, double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int shift = 0; shift < 64; shift += 8) {
    out.push_back(static_cast<char>((bits >> shift) & 0xffU));
  }
}

double load_le64(const unsigned char* bytes) noexcept {
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = (bits << 8) | bytes[k];
  return std::bit_cast<double>(bits);
}

KeyVector read_keys(const std::filesystem::path& path, KeyFormat format) {
  const std::string bytes = slurp(path);
  KeyVector keys;
  if (format == KeyFormat::Raw) {
    if (bytes.size() % 8 != 0) {
      throw IoError("'" + path.string() + "': raw key file size " + std::to_string(bytes.size()) +
                    " is not a multiple of 8");
    }
    keys.reserve(bytes.size() / 8);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (std::size_t off = 0; off < bytes.size(); off += 8) keys.push_back(load_le64(p + off));
    return keys;
  }

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string::npos) end = bytes.size();
    ++line_no;
    std::size_t a = pos, b = end;
    while (a < b && is_blank(bytes[a])) ++a;
    while (b > a && is_blank(bytes[b - 1])) --b;
    if (a < b) {
      double v = 0.0;
      const char* first = bytes.data() + a;
      const char* last = bytes.data() + b;
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw IoError("'" + path.string() + "' line " + std::to_string(line_no) +
                      ": cannot parse '" + std::string(bytes.data() + a, b - a) + "'");
      }
      keys.push_back(v);
    }
    pos = end + 1;
  }
  return keys;
}

void write_keys(const std::filesystem::path& path, std::span<const double> keys,
                KeyFormat format) {
  std::string bytes;
  if (format == KeyFormat::Raw) {
    bytes.reserve(keys.size() * 8);
    for (const double k : keys) append_le64(bytes, k);
  } else {
    bytes.reserve(keys.size() * 24);
    char buf[40];
    for (const double k : keys) {
      const auto res = std::to_chars(buf, buf + sizeof buf, k);
      bytes.append(buf, res.ptr);
      bytes.push_back('\n');
    }
  }
  spill(path, bytes);
}

}  // namespace mlsort
