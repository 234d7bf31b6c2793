#include "colearn/scheduling/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "colearn/compression/bitstream.hpp"
#include "colearn/compression/compressor.hpp"
#include "colearn/error.hpp"

namespace colearn::scheduling {

std::vector<std::size_t> age_update(const std::vector<std::size_t>& ages, const DeviceSet& scheduled) {
  std::vector<std::size_t> out(ages.size());
  for (std::size_t i = 0; i < ages.size(); ++i) out[i] = ages[i] + 1;
  for (std::size_t i : scheduled) {
    COLEARN_REQUIRE(i < ages.size(), "age_update: scheduled device out of range");
    out[i] = 0;
  }
  return out;
}

double fairness_fn(double x, double alpha_fair) {
  COLEARN_REQUIRE(x >= 0.0, "fairness_fn: x must be nonnegative");
  COLEARN_REQUIRE(alpha_fair >= 0.0, "fairness_fn: alpha must be nonnegative");
  if (alpha_fair == 1.0) return std::log1p(x);
  return std::pow(x, 1.0 - alpha_fair) / (1.0 - alpha_fair);
}

DeviceSet top_k_by(const std::vector<double>& score, std::size_t k) {
  COLEARN_REQUIRE(k <= score.size(), "top_k_by: k exceeds device count");
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  DeviceSet out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
  return out;
}

DeviceSet random_schedule(std::size_t n, std::size_t k, RngStream& rng) {
  COLEARN_REQUIRE(k >= 1 && k <= n, "random_schedule: need 1 <= K <= N");
  return rng.sample_subset(n, k);
}

std::size_t round_robin_group_count(std::size_t n, std::size_t k) {
  COLEARN_REQUIRE(k >= 1 && k <= n, "round_robin: need 1 <= K <= N");
  return (n + k - 1) / k;
}

RoundRobinGroup round_robin_schedule(std::size_t n, std::size_t k, std::size_t t) {
  const std::size_t groups = round_robin_group_count(n, k);
  const std::size_t g = t % groups;
  RoundRobinGroup out;
  for (std::size_t i = g * k; i < std::min(n, (g + 1) * k); ++i) out.devices.push_back(i);
  out.short_group = out.devices.size() < k;
  return out;
}

DeviceSet pf_schedule(const std::vector<double>& instantaneous, const std::vector<double>& average, std::size_t k) {
  COLEARN_REQUIRE(instantaneous.size() == average.size(), "pf_schedule: size mismatch");
  std::vector<double> ratio(instantaneous.size());
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    COLEARN_REQUIRE(average[i] > 0.0, "pf_schedule: average SNR must be positive");
    ratio[i] = instantaneous[i] / average[i];
  }
  return top_k_by(ratio, k);
}

PfTracker::PfTracker(std::size_t n, double factor) : factor_(factor), average_(n, 0.0) {
  COLEARN_REQUIRE(factor > 0.0 && factor <= 1.0, "PfTracker: factor must be in (0, 1]");
}

DeviceSet PfTracker::select(const std::vector<double>& instantaneous, std::size_t k) {
  COLEARN_REQUIRE(instantaneous.size() == average_.size(), "PfTracker::select: size mismatch");
  if (!initialised_) {
    average_ = instantaneous;
    initialised_ = true;
  }
  DeviceSet out = pf_schedule(instantaneous, average_, k);
  for (std::size_t i = 0; i < average_.size(); ++i)
    average_[i] = (1.0 - factor_) * average_[i] + factor_ * instantaneous[i];
  return out;
}

DeviceSet latency_min_schedule(const std::vector<double>& rates, std::size_t k) {
  COLEARN_REQUIRE(k <= rates.size(), "latency_min_schedule: K exceeds N");
  return top_k_by(rates, k);
}

std::string update_aware_name(UpdateAwarePolicy p) {
  switch (p) {
    case UpdateAwarePolicy::bc: return "bc";
    case UpdateAwarePolicy::bn2: return "bn2";
    case UpdateAwarePolicy::bc_bn2: return "bc-bn2";
    case UpdateAwarePolicy::bn2_c: return "bn2-c";
  }
  return "?";
}

UpdateAwarePolicy update_aware_from_name(const std::string& name) {
  for (auto p : {UpdateAwarePolicy::bc, UpdateAwarePolicy::bn2, UpdateAwarePolicy::bc_bn2, UpdateAwarePolicy::bn2_c})
    if (update_aware_name(p) == name) return p;
  throw ContractViolation("unknown update-aware policy '" + name + "'");
}

DeviceSet update_aware_schedule(UpdateAwarePolicy policy, const UpdateAwareInputs& in) {
  const std::size_t n = in.channel_quality.size();
  COLEARN_REQUIRE(in.update_norms.size() == n, "update_aware_schedule: size mismatch");
  COLEARN_REQUIRE(in.k >= 1 && in.k <= n, "update_aware_schedule: need 1 <= K <= N");
  switch (policy) {
    case UpdateAwarePolicy::bc:
      return top_k_by(in.channel_quality, in.k);
    case UpdateAwarePolicy::bn2:
      return top_k_by(in.update_norms, in.k);
    case UpdateAwarePolicy::bc_bn2: {
      COLEARN_REQUIRE(in.k_c >= in.k && in.k_c <= n, "update_aware_schedule: need K <= K_c <= N");
      const DeviceSet pool = top_k_by(in.channel_quality, in.k_c);
      std::vector<double> norms;
      for (std::size_t i : pool) norms.push_back(in.update_norms[i]);
      DeviceSet out;
      for (std::size_t j : top_k_by(norms, in.k)) out.push_back(pool[j]);
      return out;
    }
    case UpdateAwarePolicy::bn2_c: {
      COLEARN_REQUIRE(static_cast<bool>(in.quantized_norm), "update_aware_schedule: BN2-C needs a quantized-norm oracle");
      std::vector<double> q(n);
      for (std::size_t i = 0; i < n; ++i) q[i] = in.quantized_norm(i);
      return top_k_by(q, in.k);
    }
  }
  return {};
}

double bn2c_quantized_norm(const DenseVector& update, double budget_bits, RngStream& rng) {
  COLEARN_REQUIRE(budget_bits >= 0.0, "bn2c_quantized_norm: budget must be nonnegative");
  if (std::isinf(budget_bits)) return update.norm2();
  // tag + dim + L + norm, then (1 + b) bits per coordinate for L = 2^b - 1.
  const double header_bits = 8.0 * (1 + 4 + 4 + 8);
  const auto d = static_cast<double>(update.dim());
  for (unsigned b = 31; b >= 1; --b) {
    const double bits = header_bits + 8.0 * std::ceil(d * (1.0 + b) / 8.0);
    if (bits > budget_bits) continue;
    compression::CompressorSpec spec;
    spec.scheme = compression::Scheme::stochastic_uniform;
    spec.levels = static_cast<std::uint32_t>((std::uint64_t{1} << b) - 1);
    const auto msg = compression::compress(update, spec, rng);
    COLEARN_REQUIRE(static_cast<double>(msg.bit_size()) <= budget_bits, "bn2c_quantized_norm: size accounting drifted");
    return msg.dense.norm2();
  }
  return 0.0;
}

}  // namespace colearn::scheduling
