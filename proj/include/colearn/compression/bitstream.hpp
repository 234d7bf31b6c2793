#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace colearn::compression {

// Append-only bit sequence.
class BitWriter {
 public:
  void put(bool bit) { bits_.push_back(bit); }
  // Writes the low `width` bits of `value`, most significant first.
  void put_uint(std::uint64_t value, unsigned width);

  const std::vector<bool>& bits() const noexcept { return bits_; }
  std::size_t size() const noexcept { return bits_.size(); }

 private:
  std::vector<bool> bits_;
};

// Sequential reader; throws DecodeError with the failing bit position.
class BitReader {
 public:
  explicit BitReader(const std::vector<bool>& bits) : bits_(bits) {}

  bool get();
  std::uint64_t get_uint(unsigned width);
  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bits_.size() - pos_; }

 private:
  const std::vector<bool>& bits_;
  std::size_t pos_ = 0;
};

// "1011..." rendering, one character per bit.
std::string to_string(const std::vector<bool>& bits);
std::vector<bool> bits_from_string(const std::string& text);

// Packs bits most-significant-bit first within each byte; the last byte is zero padded.
std::vector<std::uint8_t> pack_bits(const std::vector<bool>& bits);
// Inverse of pack_bits for a known bit count; nonzero padding is a DecodeError.
std::vector<bool> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bit_count,
                              std::size_t byte_offset = 0);

// Little-endian scalar I/O.
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f64(std::vector<std::uint8_t>& out, double v);

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8();
  std::uint32_t u32();
  double f64();
  std::span<const std::uint8_t> take(std::size_t n);
  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Number of bits needed to write integers in [0, n).
unsigned bits_for_count(std::uint64_t n);

}  // namespace colearn::compression
