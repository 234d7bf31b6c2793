#include "colearn/compression/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "colearn/error.hpp"

namespace colearn::compression {

namespace {

void require_finite(const DenseVector& g, const char* what) {
  if (!g.all_finite()) throw ContractViolation(std::string(what) + ": input has non-finite entries");
}

// Indices (0-based) of the k largest magnitudes, ties to the lower index.
std::vector<std::size_t> top_indices(const DenseVector& g, std::size_t k) {
  std::vector<std::size_t> idx(g.dim());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(g[a]), mb = std::abs(g[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), before);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

Mask Mask::from_indices(std::size_t dim, const std::vector<std::size_t>& one_based) {
  Mask m(dim);
  for (std::size_t i : one_based) {
    COLEARN_REQUIRE(i >= 1 && i <= dim, "Mask::from_indices: index out of range");
    m.bits[i - 1] = 1;
  }
  return m;
}

std::size_t Mask::nnz() const noexcept {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double Mask::level() const noexcept {
  return bits.empty() ? 0.0 : static_cast<double>(nnz()) / static_cast<double>(bits.size());
}

std::vector<std::size_t> Mask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back(i + 1);
  return out;
}

DenseVector SparseUpdate::to_dense() const {
  DenseVector v(dim);
  for (const auto& e : entries) v[e.index - 1] = e.value;
  return v;
}

Mask SparseUpdate::support() const {
  Mask m(dim);
  for (const auto& e : entries) m.bits[e.index - 1] = 1;
  return m;
}

SparseUpdate SparseUpdate::from_dense(const DenseVector& v) {
  SparseUpdate s;
  s.dim = v.dim();
  for (std::size_t i = 0; i < v.dim(); ++i)
    if (v[i] != 0.0) s.entries.push_back({i + 1, v[i]});
  return s;
}

void SparseUpdate::validate() const {
  std::size_t prev = 0;
  for (const auto& e : entries) {
    COLEARN_REQUIRE(e.index >= 1 && e.index <= dim, "SparseUpdate: index out of range");
    COLEARN_REQUIRE(e.index > prev, "SparseUpdate: indices must be strictly increasing");
    COLEARN_REQUIRE(e.value != 0.0, "SparseUpdate: stored values must be nonzero");
    prev = e.index;
  }
}

SparseUpdate apply_mask(const DenseVector& g, const Mask& m) {
  COLEARN_REQUIRE(g.dim() == m.dim(), "apply_mask: dimension mismatch");
  SparseUpdate s;
  s.dim = g.dim();
  for (std::size_t i = 0; i < g.dim(); ++i)
    if (m.bits[i] && g[i] != 0.0) s.entries.push_back({i + 1, g[i]});
  return s;
}

Mask top_k_mask(const DenseVector& g, std::size_t k) {
  COLEARN_REQUIRE(k >= 1 && k <= g.dim(), "top_k_mask: K must be in [1, d]");
  Mask m(g.dim());
  for (std::size_t i : top_indices(g, k)) m.bits[i] = 1;
  return m;
}

Mask rand_k_mask(std::size_t d, std::size_t k, RngStream& rng) {
  COLEARN_REQUIRE(k >= 1 && k <= d, "rand_k_mask: K must be in [1, d]");
  Mask m(d);
  for (std::size_t i : rng.sample_subset(d, k)) m.bits[i] = 1;
  return m;
}

Mask r_top_k_mask(const DenseVector& g, std::size_t r, std::size_t k, RngStream& rng) {
  COLEARN_REQUIRE(k >= 1 && k <= r && r <= g.dim(), "r_top_k_mask: need 1 <= K <= R <= d");
  const auto top = top_indices(g, r);
  Mask m(g.dim());
  for (std::size_t j : rng.sample_subset(r, k)) m.bits[top[j]] = 1;
  return m;
}

std::size_t sync_mask_block_count(std::size_t d, double phi) {
  COLEARN_REQUIRE(d >= 1, "sync_mask_schedule: d must be positive");
  COLEARN_REQUIRE(phi > 0.0 && phi <= 1.0, "sync_mask_schedule: phi must be in (0, 1]");
  const auto block = static_cast<std::size_t>(std::ceil(phi * static_cast<double>(d) - 1e-9));
  const std::size_t width = std::max<std::size_t>(block, 1);
  return (d + width - 1) / width;
}

Mask sync_mask_schedule(std::size_t d, double phi, std::size_t tau_max, std::size_t t) {
  COLEARN_REQUIRE(t >= 1, "sync_mask_schedule: rounds are 1-based");
  COLEARN_REQUIRE(tau_max >= 1, "sync_mask_schedule: tau_max must be at least 1");
  const std::size_t blocks = sync_mask_block_count(d, phi);
  if (static_cast<double>(tau_max) * phi < 1.0 - 1e-12 || blocks > tau_max) {
    throw ContractViolation("sync_mask_schedule: infeasible pair, tau_max * phi must be >= 1");
  }
  const std::size_t width = (d + blocks - 1) / blocks;
  const std::size_t b = (t - 1) % blocks;
  Mask m(d);
  for (std::size_t i = b * width; i < std::min(d, (b + 1) * width); ++i) m.bits[i] = 1;
  return m;
}

KeepProbabilities random_sparsify_probabilities(const DenseVector& g, double eps) {
  COLEARN_REQUIRE(eps > 0.0, "random_sparsify: eps must be positive");
  require_finite(g, "random_sparsify");
  KeepProbabilities out;
  out.p.assign(g.dim(), 0.0);
  double energy = 0.0, min_mag = INFINITY;
  for (double v : g) {
    energy += v * v;
    if (v != 0.0) min_mag = std::min(min_mag, std::abs(v));
  }
  if (energy == 0.0) return out;

  const double budget = (1.0 + eps) * energy;
  auto probs = [&](double lambda, std::vector<double>& p) {
    double variance = 0.0;
    for (std::size_t i = 0; i < g.dim(); ++i) {
      if (g[i] == 0.0) {
        p[i] = 0.0;
        continue;
      }
      p[i] = std::clamp(lambda * std::abs(g[i]), kKeepProbabilityFloor, 1.0);
      variance += g[i] * g[i] / p[i];
    }
    return variance;
  };

  // At lambda = 1 / min|g_i| every p_i = 1 and the constraint holds.
  double lo = 0.0, hi = 1.0 / min_mag;
  std::vector<double> scratch(g.dim());
  while (hi - lo > kLambdaTolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (probs(mid, scratch) <= budget) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.lambda = hi;
  probs(hi, out.p);
  return out;
}

SparseUpdate random_sparsify(const DenseVector& g, double eps, RngStream& rng) {
  const KeepProbabilities kp = random_sparsify_probabilities(g, eps);
  SparseUpdate s;
  s.dim = g.dim();
  for (std::size_t i = 0; i < g.dim(); ++i) {
    if (kp.p[i] == 0.0) continue;
    // One uniform draw per nonzero coordinate keeps streams aligned across inputs.
    const bool keep = rng.uniform() < kp.p[i];
    if (keep) s.entries.push_back({i + 1, g[i] / kp.p[i]});
  }
  return s;
}

}  // namespace colearn::compression
