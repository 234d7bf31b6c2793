#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "colearn/numerics/dense_vector.hpp"
#include "colearn/numerics/rng.hpp"

namespace colearn::compression {

// Level form of stochastic uniform quantization: coordinate i is
// sign_i * (level_i / L) * norm.
struct UniformLevels {
  double norm = 0.0;
  std::uint32_t levels = 1;  // L
  std::vector<std::uint32_t> level;
  std::vector<std::int8_t> sign;  // +1 or -1

  DenseVector to_dense() const;
};

UniformLevels quant_stochastic_uniform_levels(const DenseVector& u, std::uint32_t levels, RngStream& rng);
DenseVector quant_stochastic_uniform(const DenseVector& u, std::uint32_t levels, RngStream& rng);

// g_max * sign(g) * b with b_i ~ Bernoulli(|g_i| / g_max), g_max = ||g||_inf.
DenseVector quant_ternary(const DenseVector& g, RngStream& rng);

enum class SignMode { sign, thresholded };

// sign: +1 / -1 with sign(0) = +1. thresholded: 1 when g_i >= threshold, else 0.
std::vector<int> sign_quant(const DenseVector& g, double threshold, SignMode mode);

// Coordinate-wise majority of +1/-1 votes; a tied vote resolves to +1.
std::vector<int> majority_vote(const std::vector<std::vector<int>>& votes);

// (||g||_1 / d) sign(g).
DenseVector scaled_sign(const DenseVector& g);

// Scaled sign per block; blocks hold 1-based indices and must partition [1..d].
DenseVector block_scaled_sign(const DenseVector& g, const std::vector<std::vector<std::size_t>>& blocks);

// `count` contiguous blocks of near-equal size covering [1..d].
std::vector<std::vector<std::size_t>> contiguous_blocks(std::size_t d, std::size_t count);

// delta = ||g||_1^2 / (d ||g||_2^2).
double scaled_sign_delta(const DenseVector& g);

}  // namespace colearn::compression
