#include "colearn/compression/bitstream.hpp"

#include <bit>
#include <cstring>

#include "colearn/error.hpp"

namespace colearn::compression {

void BitWriter::put_uint(std::uint64_t value, unsigned width) {
  for (unsigned k = width; k > 0; --k) bits_.push_back(((value >> (k - 1)) & 1u) != 0);
}

bool BitReader::get() {
  if (pos_ >= bits_.size()) throw DecodeError("bitstream truncated", pos_);
  return bits_[pos_++];
}

std::uint64_t BitReader::get_uint(unsigned width) {
  if (bits_.size() - pos_ < width) throw DecodeError("bitstream truncated inside a field", pos_);
  std::uint64_t v = 0;
  for (unsigned k = 0; k < width; ++k) v = (v << 1) | (bits_[pos_++] ? 1u : 0u);
  return v;
}

std::string to_string(const std::vector<bool>& bits) {
  std::string s;
  s.reserve(bits.size());
  for (bool b : bits) s.push_back(b ? '1' : '0');
  return s;
}

std::vector<bool> bits_from_string(const std::string& text) {
  std::vector<bool> bits;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '0' || c == '1') {
      bits.push_back(c == '1');
    } else if (c != ' ') {
      throw ContractViolation("bits_from_string: unexpected character at offset " + std::to_string(i));
    }
  }
  return bits;
}

std::vector<std::uint8_t> pack_bits(const std::vector<bool>& bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  return out;
}

std::vector<bool> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bit_count,
                              std::size_t byte_offset) {
  const std::size_t nbytes = (bit_count + 7) / 8;
  if (bytes.size() < nbytes) throw DecodeError("packed bitstream truncated", bytes.size() * 8);
  std::vector<bool> bits(bit_count);
  for (std::size_t i = 0; i < bit_count; ++i) bits[i] = (bytes[i / 8] & (0x80u >> (i % 8))) != 0;
  for (std::size_t i = bit_count; i < nbytes * 8; ++i) {
    if (bytes[i / 8] & (0x80u >> (i % 8)))
      throw DecodeError("nonzero padding bit", byte_offset * 8 + i);
  }
  return bits;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto u = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(u >> (8 * k)));
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
  const auto b = take(4);
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | b[static_cast<std::size_t>(k)];
  return v;
}

double ByteReader::f64() {
  const auto b = take(8);
  std::uint64_t u = 0;
  for (int k = 7; k >= 0; --k) u = (u << 8) | b[static_cast<std::size_t>(k)];
  return std::bit_cast<double>(u);
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (bytes_.size() - pos_ < n) throw DecodeError("byte stream truncated", pos_ * 8);
  auto s = bytes_.subspan(pos_, n);
  pos_ += n;
  return s;
}

unsigned bits_for_count(std::uint64_t n) {
  if (n <= 1) return 0;
  return static_cast<unsigned>(std::bit_width(n - 1));
}

}  // namespace colearn::compression
