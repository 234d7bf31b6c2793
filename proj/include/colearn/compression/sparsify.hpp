#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "colearn/numerics/dense_vector.hpp"
#include "colearn/numerics/rng.hpp"

namespace colearn::compression {

// Binary selection vector. bits[i] refers to coordinate i + 1 in the 1-based
// index convention of SparseUpdate and the codec.
struct Mask {
  std::vector<std::uint8_t> bits;

  Mask() = default;
  explicit Mask(std::size_t dim, bool fill = false) : bits(dim, fill ? 1 : 0) {}
  static Mask from_indices(std::size_t dim, const std::vector<std::size_t>& one_based);

  std::size_t dim() const noexcept { return bits.size(); }
  std::size_t nnz() const noexcept;
  // Sparsification level popcount / d.
  double level() const noexcept;
  bool test(std::size_t one_based) const { return bits.at(one_based - 1) != 0; }
  std::vector<std::size_t> indices() const;

  friend bool operator==(const Mask&, const Mask&) = default;
};

struct SparseEntry {
  std::size_t index = 0;  // 1-based
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sparse vector with strictly increasing 1-based indices and nonzero values.
struct SparseUpdate {
  std::size_t dim = 0;
  std::vector<SparseEntry> entries;

  DenseVector to_dense() const;
  Mask support() const;
  static SparseUpdate from_dense(const DenseVector& v);
  // Throws ContractViolation when an invariant is broken.
  void validate() const;

  friend bool operator==(const SparseUpdate&, const SparseUpdate&) = default;
};

// Entries are the masked-in coordinates of g; zero values are omitted.
SparseUpdate apply_mask(const DenseVector& g, const Mask& m);

// Largest |g_i| first, ties to the lower index.
Mask top_k_mask(const DenseVector& g, std::size_t k);
// Uniform K-subset of [1..d].
Mask rand_k_mask(std::size_t d, std::size_t k, RngStream& rng);
// Uniform K-subset of the top-R magnitude set.
Mask r_top_k_mask(const DenseVector& g, std::size_t r, std::size_t k, RngStream& rng);

// Cyclic block schedule: blocks of ceil(phi d) consecutive coordinates, round t
// (1-based) selects block (t - 1) mod block_count. Requires tau_max * phi >= 1.
Mask sync_mask_schedule(std::size_t d, double phi, std::size_t tau_max, std::size_t t);
std::size_t sync_mask_block_count(std::size_t d, double phi);

struct KeepProbabilities {
  double lambda = 0.0;
  std::vector<double> p;  // zero for zero coordinates
};

inline constexpr double kKeepProbabilityFloor = 1e-12;
inline constexpr double kLambdaTolerance = 1e-10;

// Smallest lambda with sum g_i^2 / p_i <= (1 + eps) sum g_i^2 where
// p_i = clamp(lambda |g_i|, p_min, 1), found by bisection.
KeepProbabilities random_sparsify_probabilities(const DenseVector& g, double eps);

// Keeps coordinate i with probability p_i and rescales it by 1 / p_i.
SparseUpdate random_sparsify(const DenseVector& g, double eps, RngStream& rng);

}  // namespace colearn::compression
