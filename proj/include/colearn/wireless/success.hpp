#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "colearn/numerics/rng.hpp"
#include "colearn/wireless/channel.hpp"

namespace colearn::wireless {

struct VParams {
  double gamma = 1.0;   // SINR threshold gamma*
  double alpha = 4.0;   // path-loss exponent
  double lambda = 1e-4; // PPP density
  double power = 1.0;   // P
  double noise = 1.0;   // sigma^2
};

// sigma^2 gamma lambda^(1 - alpha/2) / (P 2^(alpha-2)) * gamma^(alpha/2)
//   * int_0^inf (1 - exp(-(12/(5 pi)) gamma^(alpha/2) u)) / (1 + u^(alpha/2)) du.
// The integral is split at u = 1; the tail is mapped onto a bounded integrand
// and both pieces use adaptive Simpson with absolute tolerance 1e-9.
double v_integral(const VParams& p);
// The integral factor alone.
double v_integral_core(double gamma, double alpha);

// Adaptive Simpson quadrature on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int max_depth = 50);

enum class SchedulingPolicy { rs, rr, pf };

std::string policy_name(SchedulingPolicy p);
SchedulingPolicy policy_from_name(const std::string& name);

struct AnalyticSuccess {
  double time_average = 0.0;    // U_n averaged over rounds
  double when_scheduled = 0.0;  // success probability given the device is scheduled
};

// RS: (K/N)/(1+V). RR: 1/(1+V) when scheduled, (K/N)/(1+V) averaged.
// PF: sum_{i=1}^{N-K+1} C(N-K+1, i) (-1)^(i+1) (K/N) / (1 + V(i gamma)).
AnalyticSuccess success_prob_analytic(SchedulingPolicy policy, std::size_t k, std::size_t n, const VParams& p);

struct SuccessConfig {
  ChannelModel model;           // alpha, power, noise, threshold, PPP density
  std::size_t devices = 10;     // N
  std::size_t scheduled = 1;    // K
  double cluster_radius_m = 50; // devices uniform in this disc around their server
  double pf_factor = 0.1;
  DeviceGeometry geometry;      // used instead of a random layout when non-empty
};

struct SuccessEstimate {
  std::vector<double> per_device;      // empirical U_n
  std::vector<double> schedule_freq;   // empirical scheduling frequency
  double mean = 0.0;                   // (1/N) sum_n U_n
  double std_err = 0.0;                // standard error of mean across rounds
  double conditional = 0.0;            // successes / scheduled slots
  double conditional_std_err = 0.0;
};

// Each round: Rayleigh gains for every device, policy picks K devices on
// distinct subchannels, each subchannel sees an independent PPP of
// interferers, and success is gamma > gamma*.
SuccessEstimate success_prob_mc(SchedulingPolicy policy, const SuccessConfig& cfg, std::size_t rounds,
                                RngStream& rng);

// -1 / log(1 - U).
double rounds_figure_of_merit(double u);
// (K/N) * -1 / log(1 - U) for round robin with U the success probability when scheduled.
double rounds_figure_of_merit_rr(double u_when_scheduled, std::size_t k, std::size_t n);

}  // namespace colearn::wireless
