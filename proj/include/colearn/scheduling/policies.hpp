#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "colearn/numerics/dense_vector.hpp"
#include "colearn/numerics/rng.hpp"

namespace colearn::scheduling {

// Device ids in increasing order.
using DeviceSet = std::vector<std::size_t>;

// Scheduled devices reset to 0, all others grow by 1.
std::vector<std::size_t> age_update(const std::vector<std::size_t>& ages, const DeviceSet& scheduled);

// x^(1-a) / (1-a) for a != 1, log(1 + x) for a == 1.
double fairness_fn(double x, double alpha_fair);

// k highest scores, ties to the lower id, returned sorted by id.
DeviceSet top_k_by(const std::vector<double>& score, std::size_t k);

DeviceSet random_schedule(std::size_t n, std::size_t k, RngStream& rng);

std::size_t round_robin_group_count(std::size_t n, std::size_t k);

struct RoundRobinGroup {
  DeviceSet devices;
  bool short_group = false;  // last group when k does not divide n
};

// Fixed partition into ceil(n/k) consecutive groups; round t (0-based) gets group t mod G.
RoundRobinGroup round_robin_schedule(std::size_t n, std::size_t k, std::size_t t);

// Top-k by instantaneous over average SNR.
DeviceSet pf_schedule(const std::vector<double>& instantaneous, const std::vector<double>& average, std::size_t k);

// Proportional-fair state: the average is an exponential moving average
// initialised to the first observation.
class PfTracker {
 public:
  explicit PfTracker(std::size_t n, double factor = 0.1);

  // Selects with the current averages, then folds this round's SNR into them.
  DeviceSet select(const std::vector<double>& instantaneous, std::size_t k);
  const std::vector<double>& average() const noexcept { return average_; }

 private:
  double factor_;
  bool initialised_ = false;
  std::vector<double> average_;
};

// k devices with the highest instantaneous rate.
DeviceSet latency_min_schedule(const std::vector<double>& rates, std::size_t k);

enum class UpdateAwarePolicy { bc, bn2, bc_bn2, bn2_c };

std::string update_aware_name(UpdateAwarePolicy p);
UpdateAwarePolicy update_aware_from_name(const std::string& name);

struct UpdateAwareInputs {
  std::vector<double> channel_quality;
  std::vector<double> update_norms;
  // l2 norm of device i's update after quantization to its sole-transmitter budget.
  std::function<double(std::size_t)> quantized_norm;
  std::size_t k = 1;
  std::size_t k_c = 1;
};

DeviceSet update_aware_schedule(UpdateAwarePolicy policy, const UpdateAwareInputs& in);

// l2 norm of the stochastic-uniform quantization of `update` with the largest
// level count whose serialized size fits in budget_bits. An infinite budget
// returns the exact norm; a budget below the smallest message returns 0.
double bn2c_quantized_norm(const DenseVector& update, double budget_bits, RngStream& rng);

}  // namespace colearn::scheduling
