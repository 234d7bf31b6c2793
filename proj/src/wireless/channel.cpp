#include "colearn/wireless/channel.hpp"

#include <cmath>
#include <numbers>

#include "colearn/error.hpp"

namespace colearn::wireless {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }
double dbw_to_watts(double dbw) { return db_to_linear(dbw); }

double noise_power_from_density(double n0_w_per_hz, double bandwidth_hz) {
  COLEARN_REQUIRE(n0_w_per_hz >= 0.0 && bandwidth_hz > 0.0, "noise_power_from_density: invalid arguments");
  return n0_w_per_hz * bandwidth_hz;
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void ChannelModel::validate() const {
  COLEARN_REQUIRE(path_loss_exp > 2.0, "ChannelModel: path-loss exponent must exceed 2");
  COLEARN_REQUIRE(bandwidth_hz > 0.0, "ChannelModel: bandwidth must be positive");
  COLEARN_REQUIRE(noise_power_w >= 0.0, "ChannelModel: noise power must be nonnegative");
  COLEARN_REQUIRE(device_power_w >= 0.0 && server_power_w >= 0.0, "ChannelModel: powers must be nonnegative");
  COLEARN_REQUIRE(sinr_threshold > 0.0, "ChannelModel: SINR threshold must be positive");
  COLEARN_REQUIRE(ppp_density >= 0.0, "ChannelModel: PPP density must be nonnegative");
  COLEARN_REQUIRE(ppp_radius_factor > 0.0, "ChannelModel: PPP radius factor must be positive");
  COLEARN_REQUIRE(min_distance_m > 0.0, "ChannelModel: minimum distance must be positive");
  COLEARN_REQUIRE(rate_factor > 0.0, "ChannelModel: rate factor must be positive");
}

double ChannelModel::ppp_radius() const {
  COLEARN_REQUIRE(ppp_density > 0.0, "ChannelModel::ppp_radius: density is zero");
  return ppp_radius_factor / std::sqrt(ppp_density);
}

double DeviceGeometry::distance(std::size_t device) const {
  COLEARN_REQUIRE(device < devices.size(), "DeviceGeometry::distance: device out of range");
  return wireless::distance(server, devices[device]);
}

Point uniform_in_disc(Point center, double radius, RngStream& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  return {center.x + r * std::cos(phi), center.y + r * std::sin(phi)};
}

DeviceGeometry uniform_disc_geometry(std::size_t n, double radius, double min_distance, RngStream& rng) {
  COLEARN_REQUIRE(radius > min_distance && min_distance > 0.0, "uniform_disc_geometry: need radius > min_distance > 0");
  DeviceGeometry g;
  g.devices.reserve(n);
  while (g.devices.size() < n) {
    const Point p = uniform_in_disc(g.server, radius, rng);
    if (wireless::distance(g.server, p) >= min_distance) g.devices.push_back(p);
  }
  return g;
}

std::vector<Interferer> sample_interferers(const ChannelModel& model, RngStream& rng) {
  std::vector<Interferer> out;
  if (model.ppp_density <= 0.0) return out;
  const double radius = model.ppp_radius();
  const double area = std::numbers::pi * radius * radius;
  const std::uint64_t count = rng.poisson(model.ppp_density * area);
  out.reserve(count);
  for (std::uint64_t c = 0; c < count; ++c) {
    const Point p = uniform_in_disc({}, radius, rng);
    const double gain = model.fading ? rng.exponential(1.0) : 1.0;
    out.push_back({gain, std::max(model.min_distance_m, distance({}, p))});
  }
  return out;
}

NetworkRealization sample_realization(const ChannelModel& model, const DeviceGeometry& geometry,
                                      std::size_t subchannels, RngStream& rng) {
  model.validate();
  NetworkRealization r;
  r.gains.assign(geometry.size(), std::vector<double>(subchannels, 1.0));
  if (model.fading)
    for (auto& row : r.gains)
      for (double& h : row) h = rng.exponential(1.0);
  r.interferers.resize(subchannels);
  for (auto& set : r.interferers) set = sample_interferers(model, rng);
  return r;
}

double sinr(double power, double gain, double dist, const std::vector<Interferer>& interferers, double alpha,
            double noise_power) {
  COLEARN_REQUIRE(dist > 0.0, "sinr: distance must be positive");
  double interference = 0.0;
  for (const auto& c : interferers) interference += power * c.gain * std::pow(c.distance, -alpha);
  const double signal = power * gain * std::pow(dist, -alpha);
  const double denom = interference + noise_power;
  if (denom == 0.0) return signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return signal / denom;
}

double sinr(std::size_t device, std::size_t subchannel, const NetworkRealization& realization,
            const ChannelModel& model, const DeviceGeometry& geometry) {
  COLEARN_REQUIRE(device < realization.gains.size(), "sinr: device not in realization");
  COLEARN_REQUIRE(subchannel < realization.interferers.size(), "sinr: subchannel not in realization");
  const double d = std::max(model.min_distance_m, geometry.distance(device));
  return sinr(model.device_power_w, realization.gains[device].at(subchannel), d, realization.interferers[subchannel],
              model.path_loss_exp, model.noise_power_w);
}

double normalized_gain(double fading_gain, double dist, const ChannelModel& model) {
  COLEARN_REQUIRE(model.noise_power_w > 0.0, "normalized_gain: noise power must be positive");
  COLEARN_REQUIRE(dist > 0.0, "normalized_gain: distance must be positive");
  return fading_gain * std::pow(dist, -model.path_loss_exp) / model.noise_power_w;
}

double SubchannelAllocation::total_power(std::size_t device) const {
  double s = 0.0;
  for (double p : powers.at(device)) s += p;
  return s;
}

void validate_allocation(const SubchannelAllocation& alloc, std::size_t subchannels, double p_max) {
  std::vector<std::uint8_t> used(subchannels, 0);
  for (std::size_t i = 0; i < alloc.devices(); ++i) {
    COLEARN_REQUIRE(alloc.channels[i].size() == alloc.powers[i].size(),
                    "validate_allocation: channel and power lists differ in length");
    for (std::size_t k = 0; k < alloc.channels[i].size(); ++k) {
      const std::size_t n = alloc.channels[i][k];
      COLEARN_REQUIRE(n < subchannels, "validate_allocation: subchannel out of range");
      COLEARN_REQUIRE(!used[n], "validate_allocation: subchannel " + std::to_string(n) + " allocated twice");
      used[n] = 1;
      COLEARN_REQUIRE(alloc.powers[i][k] >= 0.0, "validate_allocation: negative power");
    }
    COLEARN_REQUIRE(alloc.total_power(i) <= p_max * (1.0 + 1e-12),
                    "validate_allocation: device " + std::to_string(i) + " exceeds the power budget");
  }
}

double subchannel_rate(double gain, double power, const ChannelModel& model) {
  COLEARN_REQUIRE(gain >= 0.0 && power >= 0.0, "subchannel_rate: gain and power must be nonnegative");
  const double r = model.rate_factor * std::log2(1.0 + gain * power);
  return model.scale_by_bandwidth ? model.bandwidth_hz * r : r;
}

std::vector<double> shannon_rates(const std::vector<std::vector<double>>& gains, const SubchannelAllocation& alloc,
                                  const ChannelModel& model) {
  COLEARN_REQUIRE(gains.size() == alloc.devices(), "shannon_rates: gain rows do not match device count");
  const std::size_t subchannels = gains.empty() ? 0 : gains.front().size();
  validate_allocation(alloc, subchannels, std::numeric_limits<double>::infinity());
  std::vector<double> rates(alloc.devices(), 0.0);
  for (std::size_t i = 0; i < alloc.devices(); ++i)
    for (std::size_t k = 0; k < alloc.channels[i].size(); ++k)
      rates[i] += subchannel_rate(gains[i].at(alloc.channels[i][k]), alloc.powers[i][k], model);
  return rates;
}

double comm_latency(double payload_bits, double rate_bps) {
  COLEARN_REQUIRE(payload_bits >= 0.0, "comm_latency: payload must be nonnegative");
  COLEARN_REQUIRE(rate_bps >= 0.0, "comm_latency: rate must be nonnegative");
  if (rate_bps == 0.0) return kInfiniteLatency;
  return payload_bits / rate_bps;
}

double comp_latency(const ComputeProfile& profile, RngStream& rng) {
  COLEARN_REQUIRE(profile.base_s >= 0.0 && profile.jitter_s >= 0.0, "comp_latency: profile must be nonnegative");
  if (profile.jitter_s == 0.0) return profile.base_s;
  return profile.base_s + profile.jitter_s * rng.uniform();
}

}  // namespace colearn::wireless
