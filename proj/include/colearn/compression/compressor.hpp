#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "colearn/numerics/dense_vector.hpp"
#include "colearn/numerics/rng.hpp"

namespace colearn::compression {

enum class Scheme : std::uint8_t {
  identity = 0,
  random_p = 1,
  top_k = 2,
  rand_k = 3,
  r_top_k = 4,
  sync_mask = 5,
  stochastic_uniform = 6,
  ternary = 7,
  sign = 8,
  thresholded_1bit = 9,
  scaled_sign = 10,
  block_scaled_sign = 11,
};

std::string scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

struct CompressorSpec {
  Scheme scheme = Scheme::identity;
  std::size_t k = 1;           // top-K, rand-K, r-top-K
  std::size_t r = 1;           // r-top-K candidate pool
  std::uint32_t levels = 1;    // stochastic uniform L
  double eps = 1.0;            // random-p variance slack
  double phi = 1.0;            // sync-mask level
  std::size_t tau_max = 1;     // sync-mask period bound
  std::size_t blocks = 1;      // block-scaled-sign contiguous block count
  double threshold = 0.0;      // thresholded 1-bit
  bool rescale = false;        // rand-K unbiased d/K scaling

  // Throws ContractViolation for parameters outside their ranges at dimension d.
  void validate(std::size_t d) const;
  bool is_mask_based() const noexcept;
};

// Compressed message: the exact wire bytes plus the dense vector they decode to.
struct Message {
  Scheme scheme = Scheme::identity;
  DenseVector dense;
  std::vector<std::uint8_t> wire;

  std::size_t byte_size() const noexcept { return wire.size(); }
  std::size_t bit_size() const noexcept { return 8 * wire.size(); }
};

// `round` is the 1-based round index consumed by the sync-mask schedule.
Message compress(const DenseVector& v, const CompressorSpec& spec, RngStream& rng, std::size_t round = 1);

// Reconstructs the dense vector from wire bytes; throws DecodeError on corrupt input.
DenseVector decode_message(const std::vector<std::uint8_t>& wire);

struct ErrorState {
  DenseVector residual;
  std::size_t owner = 0;

  ErrorState() = default;
  ErrorState(std::size_t dim, std::size_t owner_id) : residual(dim), owner(owner_id) {}
};

struct EfResult {
  Message message;
  ErrorState error;
};

// message = C(g + e), e' = (g + e) - Dense(message).
EfResult ef_compress(const DenseVector& g, const ErrorState& e, const CompressorSpec& spec,
                     RngStream& rng, std::size_t round = 1);

struct ContractionEstimate {
  double max_ratio = 0.0;     // max over x of the mean ratio ||x - C(x)||^2 / ||x||^2
  double max_std_err = 0.0;   // standard error of that mean
};

// Samples `num_x` Gaussian inputs of dimension d and averages the squared
// compression error over `draws` compressor draws each.
ContractionEstimate contraction_check(const CompressorSpec& spec, std::size_t d, std::size_t num_x,
                                      std::size_t draws, RngStream& rng);

}  // namespace colearn::compression
