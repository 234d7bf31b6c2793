#include "colearn/numerics/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "colearn/error.hpp"

namespace colearn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed) ^ h);
}

RngStream::RngStream(std::uint64_t seed, std::string label)
    : seed_(seed), label_(std::move(label)), engine_(stream_seed(seed_, label_)) {}

RngStream RngStream::child(std::string_view name) const {
  return RngStream(seed_, label_ + "/" + std::string(name));
}

RngStream RngStream::child(std::string_view name, std::uint64_t index) const {
  return RngStream(seed_, label_ + "/" + std::string(name) + "#" + std::to_string(index));
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  COLEARN_REQUIRE(n > 0, "uniform_index: n must be positive");
  // Lemire-style rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

bool RngStream::bernoulli(double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return uniform() < p;
}

double RngStream::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(a);
  has_spare_normal_ = true;
  return r * std::cos(a);
}

double RngStream::exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

std::uint64_t RngStream::poisson(double mean) {
  COLEARN_REQUIRE(mean >= 0.0 && std::isfinite(mean), "poisson: mean must be finite and >= 0");
  // Count unit-rate arrivals in [0, mean].
  std::uint64_t count = 0;
  double t = exponential(1.0);
  while (t <= mean) {
    ++count;
    t += exponential(1.0);
  }
  return count;
}

std::vector<std::size_t> RngStream::sample_subset(std::size_t n, std::size_t k) {
  COLEARN_REQUIRE(k <= n, "sample_subset: k must not exceed n");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates over the prefix.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace colearn
