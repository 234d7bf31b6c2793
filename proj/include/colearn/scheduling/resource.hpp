#pragma once

#include <cstddef>
#include <vector>

#include "colearn/wireless/channel.hpp"

namespace colearn::scheduling {

// Selected devices in scheduling order; allocation row j belongs to selected[j].
struct ScheduleDecision {
  std::vector<std::size_t> selected;
  wireless::SubchannelAllocation allocation;
  std::vector<double> rates;
  double latency_s = 0.0;
};

struct WaterFill {
  std::vector<double> powers;  // aligned with the input gains
  double rate = 0.0;
};

// Maximises sum_n rate(G_n, P_n) subject to sum_n P_n <= p_max.
WaterFill water_fill(const std::vector<double>& gains, double p_max, const wireless::ChannelModel& model);

// Relative slack applied when comparing a rate with R_min.
inline constexpr double kRateTolerance = 1e-12;
bool meets_rate(double rate, double r_min);

struct P3Result {
  bool feasible = false;
  std::vector<std::size_t> channels;  // subchannel ids
  std::vector<double> powers;
  double rate = 0.0;
};

// Fewest subchannels from `available` reaching r_min under p_max: channels are
// added in decreasing gain order (ties to the lower id) with water-filling
// inside the chosen set. gains is indexed by subchannel id.
P3Result p3_min_subchannels(const std::vector<double>& gains, const std::vector<std::size_t>& available, double r_min,
                            double p_max, const wireless::ChannelModel& model);

struct P2Inputs {
  std::vector<std::size_t> ages;
  std::vector<std::vector<double>> gains;  // [device][subchannel], noise-normalised
  std::size_t subchannels = 0;
  double r_min = 1.0;
  double p_max = 1.0;
  double alpha_fair = 0.0;
  wireless::ChannelModel model;
  std::size_t max_devices = 0;  // 0 means no cap
};

// Repeatedly solves P3 for every unscheduled device on the remaining
// subchannels and commits the device with the highest f(a_i) / |W_i|
// (ties to the lower id) until no device is feasible.
ScheduleDecision p2_greedy_schedule(const P2Inputs& in);

struct P4Candidate {
  std::size_t id = 0;
  double comm_s = 0.0;
  double comp_s = 0.0;
};

// T_i = max(T_{i-1}, comp_i) + comm_i with T_0 = 0, over the given order.
double pipelined_latency(const std::vector<P4Candidate>& ordered);

// Appends the candidate with the smallest resulting finish time (ties to the
// lower id) while the finish time stays within t_max.
ScheduleDecision p4_deadline_schedule(const std::vector<P4Candidate>& candidates, double t_max);

}  // namespace colearn::scheduling
