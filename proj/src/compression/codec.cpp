#include "colearn/compression/codec.hpp"

#include <bit>
#include <string>

#include "colearn/compression/bitstream.hpp"
#include "colearn/error.hpp"

namespace colearn::compression {

namespace {

void require_geometry(std::size_t dim, std::uint32_t block_size) {
  COLEARN_REQUIRE(block_size >= 1, "codec: block size 1/phi must be a positive integer");
  COLEARN_REQUIRE(dim <= 0xffffffffu, "codec: dimension exceeds 32 bits");
}

// Walks the bitstream and returns 0-based positions.
std::vector<std::size_t> decode_offsets(const EncodedBlob& blob) {
  require_geometry(blob.dim, blob.block_size);
  const unsigned width = blob.offset_bits();
  const std::size_t blocks = blob.block_count();
  BitReader reader(blob.bits);
  std::vector<std::size_t> positions;
  std::size_t block = 0;
  std::size_t last_in_block = 0;
  bool block_has_entry = false;
  while (block < blocks) {
    const std::size_t at = reader.position();
    if (reader.remaining() == 0) throw DecodeError("missing block terminator", at);
    if (!reader.get()) {
      ++block;
      block_has_entry = false;
      continue;
    }
    const std::size_t offset = static_cast<std::size_t>(reader.get_uint(width));
    if (offset >= blob.block_size) throw DecodeError("in-block offset exceeds block size", at);
    if (block_has_entry && offset <= last_in_block)
      throw DecodeError("in-block offsets not strictly increasing", at);
    const std::size_t pos = block * blob.block_size + offset;
    if (pos >= blob.dim) throw DecodeError("position falls in padding", at);
    positions.push_back(pos);
    last_in_block = offset;
    block_has_entry = true;
  }
  if (reader.remaining() != 0) throw DecodeError("trailing bits after last block", reader.position());
  return positions;
}

}  // namespace

unsigned EncodedBlob::offset_bits() const noexcept { return bits_for_count(block_size); }

EncodedBlob encode_positions(const Mask& m, std::uint32_t block_size) {
  require_geometry(m.dim(), block_size);
  EncodedBlob blob;
  blob.dim = static_cast<std::uint32_t>(m.dim());
  blob.block_size = block_size;
  const unsigned width = blob.offset_bits();
  BitWriter w;
  for (std::size_t b = 0; b < blob.block_count(); ++b) {
    const std::size_t start = b * block_size;
    for (std::size_t off = 0; off < block_size && start + off < m.dim(); ++off) {
      if (m.bits[start + off]) {
        w.put(true);
        w.put_uint(off, width);
      }
    }
    w.put(false);
  }
  blob.bits = w.bits();
  return blob;
}

Mask decode_positions(const EncodedBlob& blob) {
  Mask m(blob.dim);
  for (std::size_t pos : decode_offsets(blob)) m.bits[pos] = 1;
  return m;
}

EncodedBlob encode_sparse(const SparseUpdate& s, std::uint32_t block_size) {
  s.validate();
  EncodedBlob blob = encode_positions(s.support(), block_size);
  blob.values.reserve(s.entries.size());
  for (const auto& e : s.entries) blob.values.push_back(e.value);
  return blob;
}

SparseUpdate decode_sparse(const EncodedBlob& blob) {
  const auto positions = decode_offsets(blob);
  if (positions.size() != blob.values.size()) {
    throw DecodeError("value count " + std::to_string(blob.values.size()) +
                          " does not match position count " + std::to_string(positions.size()),
                      blob.bits.size());
  }
  SparseUpdate s;
  s.dim = blob.dim;
  for (std::size_t k = 0; k < positions.size(); ++k) s.entries.push_back({positions[k] + 1, blob.values[k]});
  return s;
}

std::size_t position_bit_cost(std::size_t dim, std::uint32_t block_size, std::size_t nnz) {
  require_geometry(dim, block_size);
  const std::size_t blocks = (dim + block_size - 1) / block_size;
  return nnz * (1 + bits_for_count(block_size)) + blocks;
}

std::uint32_t adaptive_block_size(std::size_t dim, std::size_t nnz) {
  if (dim == 0) return 1;
  const std::size_t ratio = nnz == 0 ? dim : (dim + nnz - 1) / nnz;
  return static_cast<std::uint32_t>(std::bit_ceil(ratio));
}

std::vector<std::uint8_t> to_bytes(const EncodedBlob& blob) {
  std::vector<std::uint8_t> out;
  // nnz = number of 1 markers; recomputed rather than trusted from values.
  const std::size_t nnz = decode_offsets(blob).size();
  COLEARN_REQUIRE(blob.values.empty() || blob.values.size() == nnz,
                  "to_bytes: value count does not match the number of positions");
  put_u32(out, blob.dim);
  put_u32(out, blob.block_size);
  put_u32(out, static_cast<std::uint32_t>(nnz));
  const auto packed = pack_bits(blob.bits);
  out.insert(out.end(), packed.begin(), packed.end());
  for (double v : blob.values) put_f64(out, v);
  return out;
}

EncodedBlob blob_from_bytes(std::span<const std::uint8_t> bytes, bool with_values) {
  ByteReader r(bytes);
  EncodedBlob blob;
  blob.dim = r.u32();
  blob.block_size = r.u32();
  if (blob.block_size == 0) throw DecodeError("zero block size in header", 32);
  const std::uint32_t nnz = r.u32();
  if (nnz > blob.dim) throw DecodeError("header nnz exceeds dimension", 64);
  const std::size_t nbits = position_bit_cost(blob.dim, blob.block_size, nnz);
  const std::size_t header = r.offset();
  const auto packed = r.take((nbits + 7) / 8);
  blob.bits = unpack_bits(packed, nbits, header);
  try {
    decode_offsets(blob);
  } catch (const DecodeError& e) {
    throw DecodeError("corrupt position stream", header * 8 + e.bit_position());
  }
  if (with_values) {
    blob.values.reserve(nnz);
    for (std::uint32_t k = 0; k < nnz; ++k) blob.values.push_back(r.f64());
  }
  if (r.remaining() != 0) throw DecodeError("trailing bytes after blob", r.offset() * 8);
  return blob;
}

std::size_t blob_byte_size(std::size_t nnz, std::size_t bit_count, bool with_values) {
  return 12 + (bit_count + 7) / 8 + (with_values ? 8 * nnz : 0);
}

}  // namespace colearn::compression
