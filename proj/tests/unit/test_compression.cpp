#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "colearn/compression/bitstream.hpp"
#include "colearn/compression/codec.hpp"
#include "colearn/compression/compressor.hpp"
#include "colearn/compression/quantize.hpp"
#include "colearn/compression/sparsify.hpp"
#include "colearn/error.hpp"
#include "test_support.hpp"

using namespace colearn;
using namespace colearn::compression;
using test_support::random_vector;

namespace {

// Per-coordinate 3-sigma check of an empirical mean against its target.
void expect_unbiased(const DenseVector& target, const std::vector<double>& sum,
                     const std::vector<double>& sum_sq, std::size_t n) {
  for (std::size_t i = 0; i < target.dim(); ++i) {
    const double mean = sum[i] / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq[i] / static_cast<double>(n) - mean * mean);
    const double sigma = std::sqrt(var / static_cast<double>(n));
    EXPECT_LE(std::abs(mean - target[i]), 3.0 * sigma + 1e-12) << "coordinate " << i;
  }
}

template <typename Draw>
void check_unbiased(const DenseVector& target, std::size_t n, Draw draw) {
  std::vector<double> sum(target.dim(), 0.0), sum_sq(target.dim(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const DenseVector x = draw();
    for (std::size_t i = 0; i < x.dim(); ++i) {
      sum[i] += x[i];
      sum_sq[i] += x[i] * x[i];
    }
  }
  expect_unbiased(target, sum, sum_sq, n);
}

// Brute-force sparse oracle: keep coordinate i exactly when bit i is set and g_i != 0.
std::vector<std::pair<std::size_t, double>> masked_pairs(const DenseVector& g, const Mask& m) {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = 0; i < g.dim(); ++i)
    if (m.bits[i] == 1 && g[i] != 0.0) out.emplace_back(i + 1, g[i]);
  return out;
}

CompressorSpec spec_for(Scheme s, std::size_t d) {
  CompressorSpec spec;
  spec.scheme = s;
  spec.k = std::max<std::size_t>(1, d / 4);
  spec.r = std::max<std::size_t>(spec.k, d / 2);
  spec.levels = 4;
  spec.eps = 0.5;
  spec.phi = 0.25;
  spec.tau_max = 4;
  spec.blocks = std::min<std::size_t>(3, d);
  spec.threshold = 0.1;
  return spec;
}

const Scheme kAllSchemes[] = {Scheme::identity,   Scheme::random_p,          Scheme::top_k,
                              Scheme::rand_k,     Scheme::r_top_k,           Scheme::sync_mask,
                              Scheme::stochastic_uniform, Scheme::ternary,   Scheme::sign,
                              Scheme::thresholded_1bit,   Scheme::scaled_sign, Scheme::block_scaled_sign};

}  // namespace

// ---- masks and sparse updates ----

TEST(mask, level_is_popcount_over_dim) {
  const Mask m = Mask::from_indices(8, {1, 4});
  EXPECT_EQ(m.nnz(), 2u);
  EXPECT_DOUBLE_EQ(m.level(), 0.25);
  EXPECT_EQ(m.indices(), (std::vector<std::size_t>{1, 4}));
  EXPECT_THROW(Mask::from_indices(3, {4}), ContractViolation);
}

TEST(top_k_mask, examples) {
  EXPECT_EQ(top_k_mask(DenseVector{0.3, -1.2, 0.7, 0.1}, 2).bits, (std::vector<std::uint8_t>{0, 1, 1, 0}));
  EXPECT_EQ(top_k_mask(DenseVector{1, 2, 3}, 3).bits, (std::vector<std::uint8_t>{1, 1, 1}));
  EXPECT_EQ(top_k_mask(DenseVector{1, 1, 1}, 2).bits, (std::vector<std::uint8_t>{1, 1, 0}));
  EXPECT_THROW(top_k_mask(DenseVector{1, 2}, 0), ContractViolation);
  EXPECT_THROW(top_k_mask(DenseVector{1, 2}, 3), ContractViolation);
}

TEST(top_k_mask, matches_sort_oracle) {
  RngStream rng(1, "topk");
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(30);
    const std::size_t k = 1 + rng.uniform_index(d);
    DenseVector g(d);
    for (double& x : g) x = static_cast<double>(static_cast<int>(rng.uniform_index(7)) - 3);  // many ties
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(g[a]) > std::abs(g[b]); });
    Mask oracle(d);
    for (std::size_t j = 0; j < k; ++j) oracle.bits[order[j]] = 1;
    EXPECT_EQ(top_k_mask(g, k), oracle);
  }
}

TEST(rand_k_mask, full_k_and_marginal_frequency) {
  RngStream rng(2, "randk");
  EXPECT_EQ(rand_k_mask(5, 5, rng).nnz(), 5u);
  const int n = 100000;
  std::vector<int> hits(4, 0);
  for (int t = 0; t < n; ++t) {
    const Mask m = rand_k_mask(4, 2, rng);
    ASSERT_EQ(m.nnz(), 2u);
    for (std::size_t i = 0; i < 4; ++i) hits[i] += m.bits[i];
  }
  const double sigma = std::sqrt(0.25 / n);
  for (int h : hits) EXPECT_NEAR(static_cast<double>(h) / n, 0.5, 3.0 * sigma);
}

TEST(r_top_k_mask, r_equals_k_is_top_k_and_subset_of_top_r) {
  RngStream rng(3, "rtopk");
  for (int trial = 0; trial < 100; ++trial) {
    const DenseVector g = random_vector(16, rng);
    EXPECT_EQ(r_top_k_mask(g, 5, 5, rng), top_k_mask(g, 5));
    const Mask top_r = top_k_mask(g, 8);
    const Mask m = r_top_k_mask(g, 8, 3, rng);
    EXPECT_EQ(m.nnz(), 3u);
    for (std::size_t i = 0; i < 16; ++i)
      if (m.bits[i]) EXPECT_TRUE(top_r.bits[i]);
  }
  EXPECT_THROW(r_top_k_mask(DenseVector{1, 2, 3}, 2, 3, rng), ContractViolation);
}

TEST(sync_mask_schedule, examples) {
  EXPECT_EQ(sync_mask_schedule(4, 0.5, 2, 1).bits, (std::vector<std::uint8_t>{1, 1, 0, 0}));
  EXPECT_EQ(sync_mask_schedule(4, 0.5, 2, 2).bits, (std::vector<std::uint8_t>{0, 0, 1, 1}));
  EXPECT_EQ(sync_mask_schedule(4, 0.5, 2, 3).bits, (std::vector<std::uint8_t>{1, 1, 0, 0}));
  for (std::size_t t = 1; t < 6; ++t) EXPECT_EQ(sync_mask_schedule(7, 1.0, 1, t).nnz(), 7u);
  EXPECT_THROW(sync_mask_schedule(4, 0.25, 3, 1), ContractViolation);
}

TEST(sync_mask_schedule, exhaustive_gap_scan) {
  for (std::size_t d = 1; d <= 24; ++d) {
    for (double phi : {0.1, 0.2, 0.25, 1.0 / 3.0, 0.5, 0.7, 1.0}) {
      const auto min_tau = static_cast<std::size_t>(std::ceil(1.0 / phi - 1e-12));
      for (std::size_t tau = min_tau; tau <= min_tau + 2; ++tau) {
        std::vector<std::size_t> last(d, 0);
        for (std::size_t t = 1; t <= 3 * tau; ++t) {
          const Mask m = sync_mask_schedule(d, phi, tau, t);
          for (std::size_t i = 0; i < d; ++i) {
            if (!m.bits[i]) continue;
            EXPECT_LE(t - last[i], tau) << "d=" << d << " phi=" << phi;
            last[i] = t;
          }
        }
        for (std::size_t i = 0; i < d; ++i) EXPECT_GT(last[i], 2 * tau);
      }
    }
  }
}

TEST(apply_mask, examples_and_random_oracle) {
  const SparseUpdate s = apply_mask(DenseVector{1, 2, 3}, Mask::from_indices(3, {1, 3}));
  EXPECT_EQ(s.entries, (std::vector<SparseEntry>{{1, 1.0}, {3, 3.0}}));
  EXPECT_TRUE(apply_mask(DenseVector{1, 2, 3}, Mask(3)).entries.empty());
  EXPECT_THROW(apply_mask(DenseVector{1, 2}, Mask(3)), ContractViolation);

  RngStream rng(4, "apply");
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(20);
    const DenseVector g = random_vector(d, rng);
    Mask m(d);
    for (auto& b : m.bits) b = rng.bernoulli(0.4) ? 1 : 0;
    const SparseUpdate su = apply_mask(g, m);
    su.validate();
    const auto pairs = masked_pairs(g, m);
    ASSERT_EQ(su.entries.size(), pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      EXPECT_EQ(su.entries[k].index, pairs[k].first);
      EXPECT_EQ(su.entries[k].value, pairs[k].second);
    }
    const DenseVector dense = su.to_dense();
    for (std::size_t i = 0; i < d; ++i) EXPECT_EQ(dense[i], m.bits[i] ? g[i] : 0.0);
    EXPECT_EQ(SparseUpdate::from_dense(dense), su);
  }
}

// ---- random sparsification ----

TEST(random_sparsify, symmetric_pair_hand_solution) {
  const DenseVector g{1.0, 1.0};
  const auto kp = random_sparsify_probabilities(g, 1.0);
  EXPECT_NEAR(kp.lambda, 0.5, 1e-9);
  EXPECT_NEAR(kp.p[0], 0.5, 1e-9);
  EXPECT_NEAR(kp.p[1], 0.5, 1e-9);
  RngStream rng(5, "rs");
  for (int t = 0; t < 50; ++t)
    for (const auto& e : random_sparsify(g, 1.0, rng).entries) EXPECT_NEAR(e.value, 2.0, 1e-8);
}

TEST(random_sparsify, constraint_holds_and_is_tight) {
  RngStream rng(6, "rs2");
  for (int trial = 0; trial < 200; ++trial) {
    const DenseVector g = random_vector(1 + rng.uniform_index(30), rng);
    const double eps = std::exp(rng.uniform(-3.0, 3.0));
    const auto kp = random_sparsify_probabilities(g, eps);
    double var = 0.0;
    for (std::size_t i = 0; i < g.dim(); ++i) var += g[i] * g[i] / kp.p[i];
    const double budget = (1.0 + eps) * g.norm2_squared();
    EXPECT_LE(var, budget * (1.0 + 1e-12));
    // Slightly smaller lambda must violate the constraint unless all p are at the floor.
    double var_lo = 0.0;
    for (std::size_t i = 0; i < g.dim(); ++i) {
      const double p = std::clamp(kp.lambda * (1.0 - 1e-8) * std::abs(g[i]), kKeepProbabilityFloor, 1.0);
      var_lo += g[i] * g[i] / p;
    }
    EXPECT_GT(var_lo, budget);
  }
}

TEST(random_sparsify, single_nonzero_keep_probability) {
  // With one nonzero the constraint reduces to g^2 / p <= (1 + eps) g^2.
  const DenseVector g{0.0, -3.0, 0.0};
  for (double eps : {0.25, 1.0, 4.0}) {
    const auto kp = random_sparsify_probabilities(g, eps);
    EXPECT_NEAR(kp.p[1], 1.0 / (1.0 + eps), 1e-9);
    EXPECT_EQ(kp.p[0], 0.0);
  }
  // Deterministic keep requires the tight limit eps -> 0.
  EXPECT_NEAR(random_sparsify_probabilities(g, 1e-9).p[1], 1.0, 1e-8);
}

TEST(random_sparsify, zero_and_non_finite_inputs) {
  RngStream rng(7, "rs3");
  EXPECT_TRUE(random_sparsify(DenseVector(4), 1.0, rng).entries.empty());
  EXPECT_THROW(random_sparsify(DenseVector{1.0, std::numeric_limits<double>::infinity()}, 1.0, rng),
               ContractViolation);
  EXPECT_THROW(random_sparsify(DenseVector{1.0}, 0.0, rng), ContractViolation);
}

TEST(random_sparsify, unbiased_moderate_eps) {
  RngStream rng(8, "rs-mc");
  const DenseVector g{0.5, -1.0, 2.0, 0.1, 0.0, -0.3};
  check_unbiased(g, 100000, [&] { return random_sparsify(g, 0.5, rng).to_dense(); });
}

TEST(random_sparsify, unbiased_with_large_eps) {
  // Large eps pushes the keep probabilities toward zero; the analytic
  // per-coordinate variance g_i^2 (1 / p_i - 1) gives the 3-sigma band.
  RngStream rng(9, "rs-floor");
  const DenseVector g{0.5, -1.0, 2.0};
  const auto floor_p = random_sparsify_probabilities(g, 1e6).p;
  EXPECT_LT(*std::max_element(floor_p.begin(), floor_p.end()), 1e-5);
  const double eps = 100.0;
  const auto kp = random_sparsify_probabilities(g, eps);
  for (double p : kp.p) EXPECT_LT(p, 0.02);
  const std::size_t n = 100000;
  std::vector<double> sum(3, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const DenseVector x = random_sparsify(g, eps, rng).to_dense();
    for (std::size_t i = 0; i < 3; ++i) sum[i] += x[i];
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double sigma = std::sqrt(g[i] * g[i] * (1.0 / kp.p[i] - 1.0) / static_cast<double>(n));
    EXPECT_NEAR(sum[i] / static_cast<double>(n), g[i], 3.0 * sigma);
  }
}

// ---- codec ----

TEST(codec, worked_example_bitstream) {
  const Mask m = Mask::from_indices(24, {1, 5, 17});
  const EncodedBlob blob = encode_positions(m, 8);
  EXPECT_EQ(to_string(blob.bits), "100011000010000");
  EXPECT_EQ(blob.bits, bits_from_string("1000 1100 0 0 1000 0"));
  EXPECT_EQ(decode_positions(blob), m);
}

TEST(codec, empty_mask_is_one_terminator_per_block) {
  EXPECT_EQ(to_string(encode_positions(Mask(24), 8).bits), "000");
}

TEST(codec, golden_bytes) {
  const Mask m = Mask::from_indices(24, {1, 5, 17});
  EXPECT_EQ(to_bytes(encode_positions(m, 8)), test_support::read_hex_file(test_support::golden_path("codec_example.hex")));
  SparseUpdate s;
  s.dim = 24;
  s.entries = {{1, 1.0}, {5, -2.5}, {17, 0.125}};
  const auto golden = test_support::read_hex_file(test_support::golden_path("codec_example_values.hex"));
  EXPECT_EQ(to_bytes(encode_sparse(s, 8)), golden);
  EXPECT_EQ(decode_sparse(blob_from_bytes(golden)), s);
}

TEST(codec, fuzz_round_trip_and_bit_cost) {
  RngStream rng(10, "codec-fuzz");
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(300);
    const std::uint32_t block = 1u << rng.uniform_index(8);
    Mask m(d);
    const double density = rng.uniform();
    for (auto& b : m.bits) b = rng.bernoulli(density) ? 1 : 0;
    const EncodedBlob blob = encode_positions(m, block);
    ASSERT_EQ(decode_positions(blob), m);
    const std::size_t blocks = (d + block - 1) / block;
    const std::size_t log2_block = static_cast<std::size_t>(std::log2(block));
    ASSERT_EQ(blob.bits.size(), m.nnz() * (1 + log2_block) + blocks);
    ASSERT_EQ(position_bit_cost(d, block, m.nnz()), blob.bits.size());
    const auto bytes = to_bytes(blob);
    ASSERT_EQ(bytes.size(), blob_byte_size(m.nnz(), blob.bits.size(), false));
    ASSERT_EQ(decode_positions(blob_from_bytes(bytes, false)), m);
  }
}

TEST(codec, non_power_of_two_block_round_trips) {
  RngStream rng(11, "codec-np2");
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(100);
    const std::uint32_t block = 1 + static_cast<std::uint32_t>(rng.uniform_index(12));
    Mask m(d);
    for (auto& b : m.bits) b = rng.bernoulli(0.3) ? 1 : 0;
    EXPECT_EQ(decode_positions(encode_positions(m, block)), m);
  }
}

TEST(codec, truncated_stream_reports_position) {
  EncodedBlob blob = encode_positions(Mask::from_indices(24, {1, 5, 17}), 8);
  blob.bits.resize(6);  // cut inside the second offset
  try {
    decode_positions(blob);
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.bit_position(), 5u);
  }
  blob.bits.resize(4);  // ends right after the first entry
  try {
    decode_positions(blob);
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.bit_position(), 4u);
  }
}

TEST(codec, corrupt_streams_rejected) {
  EncodedBlob trailing = encode_positions(Mask(8), 8);
  trailing.bits.push_back(false);
  EXPECT_THROW(decode_positions(trailing), DecodeError);

  EncodedBlob padding;
  padding.dim = 5;
  padding.block_size = 8;
  padding.bits = bits_from_string("1111 0");  // offset 7 lies in padding
  EXPECT_THROW(decode_positions(padding), DecodeError);

  EncodedBlob repeat;
  repeat.dim = 8;
  repeat.block_size = 8;
  repeat.bits = bits_from_string("1010 1010 0");
  EXPECT_THROW(decode_positions(repeat), DecodeError);

  auto bytes = test_support::read_hex_file(test_support::golden_path("codec_example.hex"));
  bytes.back() |= 0x01;  // nonzero pad bit
  try {
    blob_from_bytes(bytes, false);
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.bit_position(), 12u * 8 + 15);
  }
  bytes.pop_back();
  EXPECT_THROW(blob_from_bytes(bytes, false), DecodeError);
}

TEST(codec, adaptive_block_size) {
  EXPECT_EQ(adaptive_block_size(24, 3), 8u);
  EXPECT_EQ(adaptive_block_size(100, 10), 16u);
  EXPECT_EQ(adaptive_block_size(10, 0), 16u);
  EXPECT_EQ(adaptive_block_size(7, 7), 1u);
}

// ---- quantizers ----

TEST(quant_stochastic_uniform, boundary_values_are_deterministic) {
  RngStream rng(12, "qsu");
  const DenseVector u(16, -1.0);  // every |u_i| / ||u|| = 0.25
  for (int t = 0; t < 20; ++t) EXPECT_EQ(quant_stochastic_uniform(u, 4, rng), u);
  EXPECT_TRUE(quant_stochastic_uniform(DenseVector(3), 4, rng).is_zero());
  EXPECT_THROW(quant_stochastic_uniform(u, 0, rng), ContractViolation);
}

TEST(quant_stochastic_uniform, fine_levels_reproduce_input) {
  RngStream rng(13, "qsu-fine");
  const DenseVector u = random_vector(20, rng);
  const DenseVector q = quant_stochastic_uniform(u, 1u << 20, rng);
  EXPECT_LE((q - u).norm2() / u.norm2(), 1e-5);
}

TEST(quant_stochastic_uniform, outputs_lie_on_grid_neighbours) {
  RngStream rng(14, "qsu-grid");
  for (int trial = 0; trial < 200; ++trial) {
    const DenseVector u = random_vector(10, rng);
    const std::uint32_t levels = 1 + static_cast<std::uint32_t>(rng.uniform_index(8));
    const UniformLevels q = quant_stochastic_uniform_levels(u, levels, rng);
    for (std::size_t i = 0; i < u.dim(); ++i) {
      const double scaled = std::abs(u[i]) / u.norm2() * levels;
      EXPECT_TRUE(q.level[i] == static_cast<std::uint32_t>(std::floor(scaled)) ||
                  q.level[i] == static_cast<std::uint32_t>(std::ceil(scaled)));
      EXPECT_EQ(q.sign[i], u[i] < 0 ? -1 : 1);
    }
  }
}

TEST(quant_stochastic_uniform, unbiased_three_four) {
  RngStream rng(15, "qsu-mc");
  const DenseVector u{3.0, 4.0};
  check_unbiased(u, 100000, [&] { return quant_stochastic_uniform(u, 3, rng); });
}

TEST(quant_ternary, examples_and_support) {
  RngStream rng(16, "tern");
  for (int t = 0; t < 20; ++t) EXPECT_EQ(quant_ternary(DenseVector{2, 0}, rng), (DenseVector{2, 0}));
  EXPECT_TRUE(quant_ternary(DenseVector(3), rng).is_zero());
  for (int trial = 0; trial < 200; ++trial) {
    const DenseVector g = random_vector(9, rng);
    const double gmax = g.norm_inf();
    for (double x : quant_ternary(g, rng)) EXPECT_TRUE(x == 0.0 || x == gmax || x == -gmax);
  }
}

TEST(quant_ternary, unbiased) {
  RngStream rng(17, "tern-mc");
  const DenseVector g{1.0, -2.0, 0.5};
  check_unbiased(g, 100000, [&] { return quant_ternary(g, rng); });
}

TEST(sign_quant, examples) {
  EXPECT_EQ(sign_quant(DenseVector{0.1, -7, 0}, 0.0, SignMode::sign), (std::vector<int>{1, -1, 1}));
  RngStream rng(18, "sign");
  for (int trial = 0; trial < 100; ++trial) {
    DenseVector g = random_vector(12, rng);
    g[0] = 0.0;
    const auto s = sign_quant(g, 0.0, SignMode::sign);
    const auto t = sign_quant(g, 0.0, SignMode::thresholded);
    for (std::size_t i = 0; i < g.dim(); ++i) EXPECT_EQ(t[i], (s[i] + 1) / 2);
  }
  EXPECT_EQ(sign_quant(DenseVector{0.5, 1.5, 1.0}, 1.0, SignMode::thresholded), (std::vector<int>{0, 1, 1}));
}

TEST(majority_vote, examples) {
  EXPECT_EQ(majority_vote({{1, -1}, {1, -1}, {-1, 1}}), (std::vector<int>{1, -1}));
  EXPECT_EQ(majority_vote({{1}, {-1}}), (std::vector<int>{1}));
  EXPECT_THROW(majority_vote({}), ContractViolation);
}

TEST(scaled_sign, examples) {
  EXPECT_EQ(scaled_sign(DenseVector{1, -3}), (DenseVector{2, -2}));
  RngStream rng(19, "ss");
  const DenseVector g = random_vector(7, rng);
  std::vector<std::vector<std::size_t>> singletons;
  for (std::size_t i = 1; i <= 7; ++i) singletons.push_back({i});
  EXPECT_EQ(block_scaled_sign(g, singletons), g);
  EXPECT_EQ(block_scaled_sign(g, contiguous_blocks(7, 1)), scaled_sign(g));
  EXPECT_THROW(block_scaled_sign(g, {{1, 2, 3}, {3, 4, 5, 6, 7}}), ContractViolation);
  EXPECT_THROW(block_scaled_sign(g, {{1, 2, 3}}), ContractViolation);
}

TEST(scaled_sign, delta_identity) {
  RngStream rng(20, "delta");
  for (int trial = 0; trial < 1000; ++trial) {
    const DenseVector g = random_vector(1 + rng.uniform_index(64), rng, std::exp(rng.uniform(-3, 3)));
    const double err = (scaled_sign(g) - g).norm2_squared();
    const double energy = g.norm2_squared();
    const double delta = scaled_sign_delta(g);
    EXPECT_LE(err, (1.0 - delta) * energy + 1e-12 * energy);
    EXPECT_NEAR(err, energy - g.norm1() * g.norm1() / static_cast<double>(g.dim()), 1e-12 * energy);
  }
}

// ---- compressor front end ----

TEST(compress, wire_decodes_to_dense_for_all_schemes) {
  RngStream rng(21, "wire");
  for (Scheme s : kAllSchemes) {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t d = 4 + rng.uniform_index(40);
      const DenseVector v = random_vector(d, rng);
      const Message msg = compress(v, spec_for(s, d), rng, 1 + rng.uniform_index(9));
      EXPECT_EQ(decode_message(msg.wire), msg.dense) << scheme_name(s);
      EXPECT_EQ(msg.dense.dim(), d);
    }
  }
}

TEST(compress, byte_sizes) {
  RngStream rng(22, "sizes");
  const DenseVector v = random_vector(20, rng);
  EXPECT_EQ(compress(v, spec_for(Scheme::identity, 20), rng).byte_size(), 5u + 8 * 20);
  EXPECT_EQ(compress(v, spec_for(Scheme::sign, 20), rng).byte_size(), 5u + 3);
  EXPECT_EQ(compress(v, spec_for(Scheme::scaled_sign, 20), rng).byte_size(), 5u + 4 + 8 + 3);
  EXPECT_EQ(compress(v, spec_for(Scheme::ternary, 20), rng).byte_size(), 5u + 8 + 5);
  CompressorSpec top = spec_for(Scheme::top_k, 20);
  top.k = 2;
  // block 16: 2 entries x 5 bits + 2 terminators = 12 bits
  EXPECT_EQ(compress(v, top, rng).byte_size(), 5u + 12 + 2 + 16);
}

TEST(compress, corrupt_wire_throws_decode_error) {
  RngStream rng(23, "corrupt");
  const DenseVector v = random_vector(10, rng);
  for (Scheme s : kAllSchemes) {
    auto wire = compress(v, spec_for(s, 10), rng).wire;
    auto truncated = wire;
    truncated.pop_back();
    EXPECT_THROW(decode_message(truncated), DecodeError) << scheme_name(s);
    wire.push_back(0);
    EXPECT_THROW(decode_message(wire), DecodeError) << scheme_name(s);
  }
  EXPECT_THROW(decode_message({200, 1, 0, 0, 0}), DecodeError);
}

TEST(compress, scheme_names_round_trip) {
  for (Scheme s : kAllSchemes) EXPECT_EQ(scheme_from_name(scheme_name(s)), s);
  EXPECT_FALSE(scheme_from_name("gzip").has_value());
}

// ---- error feedback ----

TEST(ef_compress, identity_leaves_no_error) {
  RngStream rng(24, "ef-id");
  ErrorState e(6, 0);
  for (int t = 0; t < 10; ++t) {
    const auto r = ef_compress(random_vector(6, rng), e, spec_for(Scheme::identity, 6), rng);
    EXPECT_TRUE(r.error.residual.is_zero());
    e = r.error;
  }
}

TEST(ef_compress, top1_hand_trace) {
  RngStream rng(25, "ef-top1");
  CompressorSpec spec;
  spec.scheme = Scheme::top_k;
  spec.k = 1;
  const auto r1 = ef_compress(DenseVector{3, 1}, ErrorState(2, 0), spec, rng);
  EXPECT_EQ(r1.message.dense, (DenseVector{3, 0}));
  EXPECT_EQ(r1.error.residual, (DenseVector{0, 1}));
  const auto r2 = ef_compress(DenseVector{0, 0}, r1.error, spec, rng);
  EXPECT_EQ(r2.message.dense, (DenseVector{0, 1}));
  EXPECT_EQ(r2.error.residual, (DenseVector{0, 0}));
}

TEST(ef_compress, identity_fuzz_all_schemes) {
  // Mask-based schemes copy or zero each coordinate, so the identity is exact.
  // Value-altering schemes satisfy e' = fl(v - c) exactly; c + e' then equals v
  // up to the rounding of one subtraction and one addition.
  RngStream rng(26, "ef-fuzz");
  for (int trial = 0; trial < 10000; ++trial) {
    const Scheme s = kAllSchemes[trial % std::size(kAllSchemes)];
    const std::size_t d = 4 + rng.uniform_index(28);
    const CompressorSpec spec = spec_for(s, d);
    ErrorState e(d, 0);
    e.residual = random_vector(d, rng, 0.3);
    const DenseVector g = random_vector(d, rng);
    const auto r = ef_compress(g, e, spec, rng, 1 + trial % 5);
    const DenseVector v = g + e.residual;
    const DenseVector sum = r.message.dense + r.error.residual;
    if (spec.is_mask_based()) {
      ASSERT_EQ(sum, v) << scheme_name(s);
    } else {
      ASSERT_EQ(r.error.residual, v - r.message.dense) << scheme_name(s);
      for (std::size_t i = 0; i < d; ++i) {
        const double scale = std::max(std::abs(v[i]), std::abs(r.message.dense[i]));
        ASSERT_LE(std::abs(sum[i] - v[i]), 2.0 * std::numeric_limits<double>::epsilon() * scale)
            << scheme_name(s);
      }
    }
  }
}

TEST(ef_compress, quantizer_identity_cannot_be_bitwise) {
  // c = 1 and v = 1e-20: no double e' gives fl(c + e') == v.
  const double c = 1.0, v = 1e-20;
  const double e = v - c;
  EXPECT_NE(c + e, v);
  EXPECT_NE(c + std::nextafter(e, 0.0), v);
  EXPECT_NE(c + std::nextafter(e, -2.0), v);
}

// ---- contraction ----

TEST(contraction_check, top_k_full_is_lossless) {
  RngStream rng(27, "contr");
  CompressorSpec spec;
  spec.scheme = Scheme::top_k;
  spec.k = 8;
  EXPECT_EQ(contraction_check(spec, 8, 100, 1, rng).max_ratio, 0.0);
}

TEST(contraction_check, rand_k_expected_ratio) {
  RngStream rng(28, "contr-rk");
  CompressorSpec spec;
  spec.scheme = Scheme::rand_k;
  spec.k = 2;
  const auto est = contraction_check(spec, 8, 10, 10000, rng);
  EXPECT_LE(est.max_ratio, 0.75 + 3.0 * est.max_std_err);
  EXPECT_GT(est.max_ratio, 0.70);
}

TEST(contraction_check, top_k_per_sample_bound) {
  RngStream rng(29, "contr-tk");
  CompressorSpec spec;
  spec.scheme = Scheme::top_k;
  spec.k = 2;
  EXPECT_LE(contraction_check(spec, 8, 1000, 1, rng).max_ratio, 0.75);
}
