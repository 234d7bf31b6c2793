#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace colearn {

// Named random stream. The engine seed is derived from (seed, label), so each
// device/purpose pair has its own reproducible sequence. Distributions are
// implemented locally on top of the raw engine output.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string label);

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }

  // Sub-stream "<label>/<name>" under the same master seed.
  RngStream child(std::string_view name) const;
  RngStream child(std::string_view name, std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer on [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Exponential with the given mean.
  double exponential(double mean = 1.0);
  std::uint64_t poisson(double mean);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Uniformly random k-subset of [0, n), returned in increasing order.
  std::vector<std::size_t> sample_subset(std::size_t n, std::size_t k);

 private:
  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t stream_seed(std::uint64_t seed, std::string_view label);

}  // namespace colearn
