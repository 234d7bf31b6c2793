#include "colearn/compression/quantize.hpp"

#include <algorithm>
#include <cmath>

#include "colearn/error.hpp"

namespace colearn::compression {

namespace {

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

void require_finite(const DenseVector& g, const char* what) {
  if (!g.all_finite()) throw ContractViolation(std::string(what) + ": input has non-finite entries");
}

}  // namespace

DenseVector UniformLevels::to_dense() const {
  DenseVector v(level.size());
  for (std::size_t i = 0; i < level.size(); ++i)
    v[i] = static_cast<double>(sign[i]) * (static_cast<double>(level[i]) / levels * norm);
  return v;
}

UniformLevels quant_stochastic_uniform_levels(const DenseVector& u, std::uint32_t levels, RngStream& rng) {
  COLEARN_REQUIRE(levels >= 1, "quant_stochastic_uniform: L must be at least 1");
  require_finite(u, "quant_stochastic_uniform");
  UniformLevels q;
  q.levels = levels;
  q.norm = u.norm2();
  q.level.assign(u.dim(), 0);
  q.sign.assign(u.dim(), 1);
  if (q.norm == 0.0) return q;
  const double big_l = static_cast<double>(levels);
  for (std::size_t i = 0; i < u.dim(); ++i) {
    q.sign[i] = static_cast<std::int8_t>(sign_of(u[i]));
    const double scaled = std::min(std::abs(u[i]) / q.norm, 1.0) * big_l;
    const double lower = std::min(std::floor(scaled), big_l);
    const double frac = scaled - lower;
    const double draw = rng.uniform();
    q.level[i] = static_cast<std::uint32_t>(lower) + (draw < frac ? 1u : 0u);
  }
  return q;
}

DenseVector quant_stochastic_uniform(const DenseVector& u, std::uint32_t levels, RngStream& rng) {
  return quant_stochastic_uniform_levels(u, levels, rng).to_dense();
}

DenseVector quant_ternary(const DenseVector& g, RngStream& rng) {
  require_finite(g, "quant_ternary");
  const double gmax = g.norm_inf();
  DenseVector out(g.dim());
  if (gmax == 0.0) return out;
  for (std::size_t i = 0; i < g.dim(); ++i) {
    const double p = std::abs(g[i]) / gmax;
    if (rng.uniform() < p) out[i] = gmax * sign_of(g[i]);
  }
  return out;
}

std::vector<int> sign_quant(const DenseVector& g, double threshold, SignMode mode) {
  std::vector<int> out(g.dim());
  for (std::size_t i = 0; i < g.dim(); ++i) {
    if (mode == SignMode::sign) {
      out[i] = g[i] < 0.0 ? -1 : 1;
    } else {
      out[i] = g[i] >= threshold ? 1 : 0;
    }
  }
  return out;
}

std::vector<int> majority_vote(const std::vector<std::vector<int>>& votes) {
  COLEARN_REQUIRE(!votes.empty(), "majority_vote: no votes");
  const std::size_t d = votes.front().size();
  std::vector<long> tally(d, 0);
  for (const auto& v : votes) {
    COLEARN_REQUIRE(v.size() == d, "majority_vote: vote dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) tally[i] += v[i];
  }
  std::vector<int> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = tally[i] < 0 ? -1 : 1;
  return out;
}

DenseVector scaled_sign(const DenseVector& g) {
  COLEARN_REQUIRE(g.dim() > 0, "scaled_sign: empty vector");
  return block_scaled_sign(g, contiguous_blocks(g.dim(), 1));
}

DenseVector block_scaled_sign(const DenseVector& g, const std::vector<std::vector<std::size_t>>& blocks) {
  require_finite(g, "block_scaled_sign");
  std::vector<std::uint8_t> seen(g.dim(), 0);
  for (const auto& block : blocks) {
    COLEARN_REQUIRE(!block.empty(), "block_scaled_sign: empty block");
    for (std::size_t i : block) {
      COLEARN_REQUIRE(i >= 1 && i <= g.dim(), "block_scaled_sign: index out of range");
      COLEARN_REQUIRE(!seen[i - 1], "block_scaled_sign: blocks overlap");
      seen[i - 1] = 1;
    }
  }
  COLEARN_REQUIRE(std::all_of(seen.begin(), seen.end(), [](std::uint8_t s) { return s != 0; }),
                  "block_scaled_sign: blocks do not cover every coordinate");
  DenseVector out(g.dim());
  for (const auto& block : blocks) {
    double l1 = 0.0;
    for (std::size_t i : block) l1 += std::abs(g[i - 1]);
    const double scale = l1 / static_cast<double>(block.size());
    for (std::size_t i : block) out[i - 1] = scale * sign_of(g[i - 1]);
  }
  return out;
}

std::vector<std::vector<std::size_t>> contiguous_blocks(std::size_t d, std::size_t count) {
  COLEARN_REQUIRE(count >= 1 && count <= d, "contiguous_blocks: need 1 <= count <= d");
  std::vector<std::vector<std::size_t>> blocks(count);
  const std::size_t base = d / count, extra = d % count;
  std::size_t next = 1;
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    for (std::size_t k = 0; k < len; ++k) blocks[b].push_back(next++);
  }
  return blocks;
}

double scaled_sign_delta(const DenseVector& g) {
  const double l2 = g.norm2_squared();
  COLEARN_REQUIRE(l2 > 0.0, "scaled_sign_delta: zero vector");
  const double l1 = g.norm1();
  return l1 * l1 / (static_cast<double>(g.dim()) * l2);
}

}  // namespace colearn::compression
