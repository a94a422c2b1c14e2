#pragma once

// Little-endian primitives and the framed "magic + JSON header + payload"
// container shared by the parameter and update wire formats.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fogcache::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_f64(std::vector<std::uint8_t>& out, double v);

/// Bounds-checked little-endian reader.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::span<const std::uint8_t> take(std::size_t n);
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

/// Writes magic (4 bytes), the header length as u32 and the header text.
void put_frame_header(std::vector<std::uint8_t>& out, std::string_view magic,
                      std::string_view header);

/// Checks the magic and returns the header text; the reader is left at the payload.
std::string read_frame_header(Reader& in, std::string_view magic);

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes,
                    std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace fogcache::io
