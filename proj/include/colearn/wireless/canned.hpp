#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "colearn/numerics/rng.hpp"
#include "colearn/wireless/channel.hpp"

namespace colearn::wireless {

// Single-cell network for the scheduling-bias experiment.
struct Fig1Network {
  ChannelModel model;  // full-band model: rate = B log2(1 + SNR)
  std::size_t devices = 100;
  std::size_t scheduled = 20;
  double disc_radius_m = 500.0;
  double noise_density_w_per_hz = 0.0;
  std::size_t subchannels = 20;  // orthogonal split of B for age-aware scheduling

  // Model for one subchannel of width B / subchannels.
  ChannelModel subchannel_model() const;
};

Fig1Network fig1_network(std::size_t devices = 100, std::size_t scheduled = 20);

// Two-tier network: macro server at the origin, one small-cell server per
// hexagonal cluster, mobile users attached to their cluster's small cell.
struct HflNetwork {
  std::size_t devices = 28;
  std::size_t clusters = 7;
  double disc_radius_m = 750.0;
  double cluster_spacing_m = 500.0;
  std::size_t subcarriers = 600;
  double subcarrier_hz = 30e3;
  double mbs_power_w = 20.0;
  double sbs_power_w = 6.3;
  double device_power_w = 0.2;
  double path_loss_exp = 3.76;
  double noise_density_w_per_hz = 0.0;
  double fronthaul_factor = 100.0;
  double min_distance_m = 1.0;

  double band_hz() const { return static_cast<double>(subcarriers) * subcarrier_hz; }
};

HflNetwork hfl_network();

// Center cell plus up to six neighbours at the given spacing.
std::vector<Point> hex_cluster_centers(std::size_t clusters, double spacing);

struct HflLayout {
  std::vector<Point> centers;            // small-cell servers
  std::vector<Point> devices;
  std::vector<std::size_t> cluster_of;   // device -> cluster
  std::vector<std::vector<std::size_t>> members;
};

// Devices split evenly over clusters, uniform in each cell's inscribed disc.
HflLayout hfl_layout(const HflNetwork& net, RngStream& rng);

// B log2(1 + P d^-alpha / (N0 B)).
double link_rate(double power_w, double dist, double bandwidth_hz, double alpha, double noise_density);

struct HflLatency {
  double fedavg_round_s = 0.0;  // all devices through the macro server
  double intra_round_s = 0.0;   // slowest cluster, full band reused per cluster
  double sync_s = 0.0;          // small cells to macro server and back over fronthaul
  double mean_access_rate_bps = 0.0;

  double fedavg_total(std::size_t rounds) const;
  double hfl_total(std::size_t rounds, std::size_t period) const;
};

// Path-loss-only latencies for one model payload per device in each direction.
HflLatency hfl_latency(const HflNetwork& net, const HflLayout& layout, double payload_bits);

std::vector<std::string> canned_names();
// One-line description of a canned configuration; throws for unknown names.
std::string canned_description(const std::string& name);

}  // namespace colearn::wireless
