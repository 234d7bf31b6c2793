#include "colearn/scheduling/resource.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "colearn/error.hpp"
#include "colearn/scheduling/policies.hpp"

namespace colearn::scheduling {

WaterFill water_fill(const std::vector<double>& gains, double p_max, const wireless::ChannelModel& model) {
  COLEARN_REQUIRE(p_max >= 0.0, "water_fill: power budget must be nonnegative");
  WaterFill out;
  out.powers.assign(gains.size(), 0.0);
  std::vector<std::size_t> order;
  for (std::size_t n = 0; n < gains.size(); ++n) {
    COLEARN_REQUIRE(gains[n] >= 0.0, "water_fill: gains must be nonnegative");
    if (gains[n] > 0.0) order.push_back(n);
  }
  if (order.empty() || p_max == 0.0) return out;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });

  // Largest active set whose water level clears every member's floor 1/G.
  std::size_t active = 1;
  double level = p_max + 1.0 / gains[order[0]];
  double inv_sum = 1.0 / gains[order[0]];
  for (std::size_t m = 2; m <= order.size(); ++m) {
    const double inv = 1.0 / gains[order[m - 1]];
    const double candidate = (p_max + inv_sum + inv) / static_cast<double>(m);
    if (candidate <= inv) break;
    inv_sum += inv;
    level = candidate;
    active = m;
  }
  if (active == 1) {
    out.powers[order[0]] = p_max;
  } else {
    for (std::size_t j = 0; j < active; ++j)
      out.powers[order[j]] = std::max(0.0, level - 1.0 / gains[order[j]]);
  }
  for (std::size_t n = 0; n < gains.size(); ++n)
    if (out.powers[n] > 0.0) out.rate += wireless::subchannel_rate(gains[n], out.powers[n], model);
  return out;
}

bool meets_rate(double rate, double r_min) { return rate >= r_min * (1.0 - kRateTolerance); }

P3Result p3_min_subchannels(const std::vector<double>& gains, const std::vector<std::size_t>& available, double r_min,
                            double p_max, const wireless::ChannelModel& model) {
  COLEARN_REQUIRE(r_min >= 0.0 && p_max >= 0.0, "p3_min_subchannels: R_min and P_max must be nonnegative");
  P3Result out;
  if (r_min == 0.0) {
    out.feasible = true;
    return out;
  }
  std::vector<std::size_t> order = available;
  for (std::size_t n : order) COLEARN_REQUIRE(n < gains.size(), "p3_min_subchannels: subchannel out of range");
  std::sort(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });
  std::vector<double> chosen;
  for (std::size_t m = 1; m <= order.size(); ++m) {
    chosen.push_back(gains[order[m - 1]]);
    const WaterFill wf = water_fill(chosen, p_max, model);
    if (meets_rate(wf.rate, r_min)) {
      out.feasible = true;
      out.channels.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
      out.powers = wf.powers;
      out.rate = wf.rate;
      return out;
    }
  }
  return out;
}

ScheduleDecision p2_greedy_schedule(const P2Inputs& in) {
  const std::size_t n = in.ages.size();
  COLEARN_REQUIRE(in.gains.size() == n, "p2_greedy_schedule: gains rows do not match device count");
  COLEARN_REQUIRE(in.r_min > 0.0, "p2_greedy_schedule: R_min must be positive");
  for (const auto& row : in.gains)
    COLEARN_REQUIRE(row.size() == in.subchannels, "p2_greedy_schedule: gains columns do not match subchannel count");

  std::vector<std::size_t> remaining(in.subchannels);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<std::uint8_t> taken(n, 0);
  ScheduleDecision out;
  while (in.max_devices == 0 || out.selected.size() < in.max_devices) {
    std::size_t best = n;
    double best_ratio = -std::numeric_limits<double>::infinity();
    P3Result best_alloc;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      P3Result r = p3_min_subchannels(in.gains[i], remaining, in.r_min, in.p_max, in.model);
      if (!r.feasible) continue;
      const double ratio =
          fairness_fn(static_cast<double>(in.ages[i]), in.alpha_fair) / static_cast<double>(r.channels.size());
      if (best == n || ratio > best_ratio) {
        best = i;
        best_ratio = ratio;
        best_alloc = std::move(r);
      }
    }
    if (best == n) break;
    taken[best] = 1;
    out.selected.push_back(best);
    out.allocation.channels.push_back(best_alloc.channels);
    out.allocation.powers.push_back(best_alloc.powers);
    out.rates.push_back(best_alloc.rate);
    std::vector<std::size_t> next;
    for (std::size_t c : remaining)
      if (std::find(best_alloc.channels.begin(), best_alloc.channels.end(), c) == best_alloc.channels.end())
        next.push_back(c);
    remaining = std::move(next);
  }
  return out;
}

double pipelined_latency(const std::vector<P4Candidate>& ordered) {
  double t = 0.0;
  for (const auto& c : ordered) {
    COLEARN_REQUIRE(c.comm_s >= 0.0 && c.comp_s >= 0.0, "pipelined_latency: latencies must be nonnegative");
    t = std::max(t, c.comp_s) + c.comm_s;
  }
  return t;
}

ScheduleDecision p4_deadline_schedule(const std::vector<P4Candidate>& candidates, double t_max) {
  COLEARN_REQUIRE(t_max > 0.0, "p4_deadline_schedule: T_max must be positive");
  for (const auto& c : candidates)
    COLEARN_REQUIRE(c.comm_s >= 0.0 && c.comp_s >= 0.0, "p4_deadline_schedule: latencies must be nonnegative");
  std::vector<std::uint8_t> used(candidates.size(), 0);
  ScheduleDecision out;
  double t = 0.0;
  for (;;) {
    std::size_t best = candidates.size();
    double best_finish = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (used[j]) continue;
      const double finish = std::max(t, candidates[j].comp_s) + candidates[j].comm_s;
      if (finish < best_finish ||
          (finish == best_finish && best < candidates.size() && candidates[j].id < candidates[best].id)) {
        best = j;
        best_finish = finish;
      }
    }
    if (best == candidates.size() || best_finish > t_max) break;
    used[best] = 1;
    t = best_finish;
    out.selected.push_back(candidates[best].id);
  }
  out.latency_s = t;
  return out;
}

}  // namespace colearn::scheduling
