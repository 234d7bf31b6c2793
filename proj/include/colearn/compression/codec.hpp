#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "colearn/compression/sparsify.hpp"

namespace colearn::compression {

// Block position code. The (zero padded) vector is cut into blocks of
// `block_size` = 1/phi coordinates. Each nonzero is written as a 1 followed by
// its in-block offset on ceil(log2(block_size)) bits, most significant first;
// every block ends with a single 0. Values, when present, travel separately.
struct EncodedBlob {
  std::uint32_t dim = 0;
  std::uint32_t block_size = 1;
  std::vector<bool> bits;
  std::vector<double> values;  // empty for position-only blobs

  std::size_t block_count() const noexcept { return (dim + block_size - 1) / block_size; }
  unsigned offset_bits() const noexcept;

  friend bool operator==(const EncodedBlob&, const EncodedBlob&) = default;
};

EncodedBlob encode_positions(const Mask& m, std::uint32_t block_size);
Mask decode_positions(const EncodedBlob& blob);

EncodedBlob encode_sparse(const SparseUpdate& s, std::uint32_t block_size);
SparseUpdate decode_sparse(const EncodedBlob& blob);

// nnz (1 + offset bits) + block count.
std::size_t position_bit_cost(std::size_t dim, std::uint32_t block_size, std::size_t nnz);

// Power-of-two block close to d / nnz, so blocks hold about one nonzero.
std::uint32_t adaptive_block_size(std::size_t dim, std::size_t nnz);

// Byte layout: u32 dim, u32 block_size, u32 nnz (little-endian), position bits
// packed MSB first and zero padded to a byte, then nnz float64 values.
std::vector<std::uint8_t> to_bytes(const EncodedBlob& blob);
// Consumes one blob from the reader; `with_values` false skips the value section.
EncodedBlob blob_from_bytes(std::span<const std::uint8_t> bytes, bool with_values = true);
std::size_t blob_byte_size(std::size_t nnz, std::size_t bit_count, bool with_values);

}  // namespace colearn::compression
