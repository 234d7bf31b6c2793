#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "colearn/numerics/rng.hpp"

namespace colearn::wireless {

inline constexpr double kInfiniteLatency = std::numeric_limits<double>::infinity();

double db_to_linear(double db);
double dbm_to_watts(double dbm);
double dbw_to_watts(double dbw);
// sigma^2 = N0 * B.
double noise_power_from_density(double n0_w_per_hz, double bandwidth_hz);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct ChannelModel {
  double path_loss_exp = 4.0;     // alpha
  double bandwidth_hz = 1.0;      // B
  double noise_power_w = 1.0;     // sigma^2
  double device_power_w = 1.0;    // p
  double server_power_w = 1.0;
  double sinr_threshold = 1.0;    // gamma*
  double ppp_density = 0.0;       // interferers per square meter
  double ppp_radius_factor = 5.0; // disc radius = factor / sqrt(density)
  double min_distance_m = 1.0;
  bool fading = true;             // Rayleigh block fading; false gives unit gains
  double rate_factor = 0.5;       // rate = factor * log2(1 + G P) per subchannel
  bool scale_by_bandwidth = false;  // multiply the rate by bandwidth_hz

  void validate() const;
  double ppp_radius() const;
};

struct DeviceGeometry {
  Point server;
  std::vector<Point> devices;

  std::size_t size() const noexcept { return devices.size(); }
  double distance(std::size_t device) const;
};

// Devices uniform in a disc around the server, at least min_distance away.
DeviceGeometry uniform_disc_geometry(std::size_t n, double radius, double min_distance, RngStream& rng);
Point uniform_in_disc(Point center, double radius, RngStream& rng);

struct Interferer {
  double gain = 1.0;
  double distance = 1.0;
};

struct NetworkRealization {
  // Fading power gains h, indexed [device][subchannel].
  std::vector<std::vector<double>> gains;
  // Out-of-cluster transmitters on each subchannel.
  std::vector<std::vector<Interferer>> interferers;
};

// Unit-mean exponential gains per device and subchannel; interferers placed by
// a PPP of density ppp_density in a disc of radius ppp_radius() around the
// server, independently per subchannel.
NetworkRealization sample_realization(const ChannelModel& model, const DeviceGeometry& geometry,
                                      std::size_t subchannels, RngStream& rng);

std::vector<Interferer> sample_interferers(const ChannelModel& model, RngStream& rng);

// p h d^-alpha / (sum_c p h_c d_c^-alpha + sigma^2).
double sinr(double power, double gain, double dist, const std::vector<Interferer>& interferers,
            double alpha, double noise_power);
double sinr(std::size_t device, std::size_t subchannel, const NetworkRealization& realization,
            const ChannelModel& model, const DeviceGeometry& geometry);

// Noise-normalized gain G = h d^-alpha / sigma^2, so that G P is the SNR.
double normalized_gain(double fading_gain, double dist, const ChannelModel& model);

// Per-device subchannel sets with the power placed on each.
struct SubchannelAllocation {
  std::vector<std::vector<std::size_t>> channels;
  std::vector<std::vector<double>> powers;

  explicit SubchannelAllocation(std::size_t devices = 0) : channels(devices), powers(devices) {}
  std::size_t devices() const noexcept { return channels.size(); }
  double total_power(std::size_t device) const;
};

// Throws ContractViolation on overlapping subchannels, out-of-range ids,
// negative powers, or a device exceeding p_max.
void validate_allocation(const SubchannelAllocation& alloc, std::size_t subchannels, double p_max);

double subchannel_rate(double gain, double power, const ChannelModel& model);

// R_i = sum over W_i of subchannel_rate(G_{i,n}, P_{i,n}); gains indexed [device][subchannel].
std::vector<double> shannon_rates(const std::vector<std::vector<double>>& gains, const SubchannelAllocation& alloc,
                                  const ChannelModel& model);

// bits / rate; zero rate gives kInfiniteLatency.
double comm_latency(double payload_bits, double rate_bps);

struct ComputeProfile {
  double base_s = 0.0;
  double jitter_s = 0.0;  // uniform extra delay on [0, jitter_s)
};

double comp_latency(const ComputeProfile& profile, RngStream& rng);

}  // namespace colearn::wireless
