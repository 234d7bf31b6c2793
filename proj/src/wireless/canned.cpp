#include "colearn/wireless/canned.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "colearn/error.hpp"

namespace colearn::wireless {

ChannelModel Fig1Network::subchannel_model() const {
  ChannelModel m = model;
  m.bandwidth_hz = model.bandwidth_hz / static_cast<double>(subchannels);
  m.noise_power_w = noise_power_from_density(noise_density_w_per_hz, m.bandwidth_hz);
  return m;
}

Fig1Network fig1_network(std::size_t devices, std::size_t scheduled) {
  COLEARN_REQUIRE(scheduled >= 1 && scheduled <= devices, "fig1_network: need 1 <= K <= N");
  Fig1Network net;
  net.devices = devices;
  net.scheduled = scheduled;
  net.noise_density_w_per_hz = dbw_to_watts(-204.0);
  net.model.path_loss_exp = 3.76;
  net.model.bandwidth_hz = 2e7;
  net.model.noise_power_w = noise_power_from_density(net.noise_density_w_per_hz, net.model.bandwidth_hz);
  net.model.device_power_w = dbm_to_watts(10.0);
  net.model.server_power_w = dbm_to_watts(15.0);
  net.model.rate_factor = 1.0;
  net.model.scale_by_bandwidth = true;
  net.model.fading = true;
  return net;
}

HflNetwork hfl_network() {
  HflNetwork net;
  net.noise_density_w_per_hz = dbm_to_watts(-174.0);
  return net;
}

std::vector<Point> hex_cluster_centers(std::size_t clusters, double spacing) {
  COLEARN_REQUIRE(clusters >= 1 && clusters <= 7, "hex_cluster_centers: supports 1 to 7 clusters");
  std::vector<Point> out{{0.0, 0.0}};
  for (std::size_t k = 0; k + 1 < clusters; ++k) {
    const double phi = static_cast<double>(k) * std::acos(-1.0) / 3.0;
    out.push_back({spacing * std::cos(phi), spacing * std::sin(phi)});
  }
  return out;
}

HflLayout hfl_layout(const HflNetwork& net, RngStream& rng) {
  COLEARN_REQUIRE(net.devices >= net.clusters, "hfl_layout: fewer devices than clusters");
  HflLayout layout;
  layout.centers = hex_cluster_centers(net.clusters, net.cluster_spacing_m);
  // Redraw until every cluster has a member.
  for (int attempt = 0; attempt < 10000; ++attempt) {
    layout.devices.clear();
    layout.cluster_of.clear();
    layout.members.assign(net.clusters, {});
    while (layout.devices.size() < net.devices) {
      const Point p = uniform_in_disc({}, net.disc_radius_m, rng);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < layout.centers.size(); ++c) {
        const double dc = distance(p, layout.centers[c]);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      if (best_d < net.min_distance_m) continue;
      layout.members[best].push_back(layout.devices.size());
      layout.cluster_of.push_back(best);
      layout.devices.push_back(p);
    }
    if (std::none_of(layout.members.begin(), layout.members.end(), [](const auto& m) { return m.empty(); }))
      return layout;
  }
  throw ContractViolation("hfl_layout: could not populate every cluster");
}

double link_rate(double power_w, double dist, double bandwidth_hz, double alpha, double noise_density) {
  COLEARN_REQUIRE(dist > 0.0 && bandwidth_hz > 0.0 && noise_density > 0.0, "link_rate: invalid arguments");
  const double snr = power_w * std::pow(dist, -alpha) / (noise_density * bandwidth_hz);
  return bandwidth_hz * std::log2(1.0 + snr);
}

double HflLatency::fedavg_total(std::size_t rounds) const { return static_cast<double>(rounds) * fedavg_round_s; }

double HflLatency::hfl_total(std::size_t rounds, std::size_t period) const {
  COLEARN_REQUIRE(period >= 1, "HflLatency::hfl_total: period must be positive");
  return static_cast<double>(rounds) * intra_round_s + static_cast<double>(rounds / period) * sync_s;
}

HflLatency hfl_latency(const HflNetwork& net, const HflLayout& layout, double payload_bits) {
  COLEARN_REQUIRE(payload_bits > 0.0, "hfl_latency: payload must be positive");
  const double alpha = net.path_loss_exp;
  const double n0 = net.noise_density_w_per_hz;
  auto share = [&](std::size_t users) {
    const std::size_t per = std::max<std::size_t>(1, net.subcarriers / users);
    return static_cast<double>(per) * net.subcarrier_hz;
  };
  auto dist = [&](Point a, Point b) { return std::max(net.min_distance_m, distance(a, b)); };

  HflLatency out;
  const Point mbs{0.0, 0.0};
  {
    const double bw = share(layout.devices.size());
    double up = 0.0, down = 0.0;
    for (const Point& p : layout.devices) {
      up = std::max(up, payload_bits / link_rate(net.device_power_w, dist(p, mbs), bw, alpha, n0));
      down = std::max(down, payload_bits / link_rate(net.mbs_power_w, dist(p, mbs), net.band_hz(), alpha, n0));
    }
    out.fedavg_round_s = up + down;
  }
  double rate_sum = 0.0;
  for (std::size_t c = 0; c < layout.members.size(); ++c) {
    const double bw = share(layout.members[c].size());
    double up = 0.0, down = 0.0;
    for (std::size_t i : layout.members[c]) {
      const double d = dist(layout.devices[i], layout.centers[c]);
      const double r_up = link_rate(net.device_power_w, d, bw, alpha, n0);
      rate_sum += r_up;
      up = std::max(up, payload_bits / r_up);
      down = std::max(down, payload_bits / link_rate(net.sbs_power_w, d, net.band_hz(), alpha, n0));
    }
    out.intra_round_s = std::max(out.intra_round_s, up + down);
  }
  out.mean_access_rate_bps = rate_sum / static_cast<double>(layout.devices.size());
  out.sync_s = 2.0 * payload_bits / (net.fronthaul_factor * out.mean_access_rate_bps);
  return out;
}

std::vector<std::string> canned_names() { return {"fig1", "hfl"}; }

std::string canned_description(const std::string& name) {
  if (name == "fig1")
    return "fig1: 100 devices uniform in a 500 m disc, 20 scheduled per round, device 10 dBm, server 15 dBm, "
           "B = 2e7 Hz, N0 = -204 dBW/Hz, alpha = 3.76, Rayleigh fading";
  if (name == "hfl")
    return "hfl: 28 devices uniform in a 750 m disc, 7 hexagonal clusters 500 m apart, 600 x 30 kHz subcarriers, "
           "powers 20 / 6.3 / 0.2 W, N0 = -174 dBm/Hz, alpha = 3.76, fronthaul 100x the mean access rate";
  throw ContractViolation("unknown canned configuration '" + name + "'");
}

}  // namespace colearn::wireless
