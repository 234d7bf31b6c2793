#include "colearn/harness/experiment.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "colearn/error.hpp"
#include "colearn/scheduling/policies.hpp"
#include "colearn/scheduling/resource.hpp"
#include "colearn/topology/graph.hpp"
#include "colearn/wireless/canned.hpp"
#include "colearn/wireless/channel.hpp"

namespace colearn::harness {

namespace {

LossModel loss_model(const TaskSection& t) {
  if (t.model == "quadratic") return LossModel::quadratic(t.dim);
  if (t.model == "logistic") return LossModel::logistic(t.dim + 1, t.classes);
  return LossModel::perceptron(t.dim + 1, t.hidden, t.classes);
}

double dense_payload_bits(std::size_t d) { return 8.0 * static_cast<double>(1 + 4 + 8 * d); }

// Per-round channel draws and device selection on the canned single-cell network.
class CellScheduler {
 public:
  CellScheduler(const ExperimentConfig& cfg, double payload_bits)
      : cfg_(cfg),
        net_(wireless::fig1_network(cfg.devices, cfg.scheduler.k.value_or(cfg.devices))),
        sub_(net_.subchannel_model()),
        payload_bits_(payload_bits),
        pf_(cfg.devices, cfg.scheduler.pf_factor) {
    RngStream geo = RngStream(cfg.seed, "channel").child("geometry");
    geometry_ = wireless::uniform_disc_geometry(cfg.devices, net_.disc_radius_m, net_.model.min_distance_m, geo);
  }

  training::RoundPlan operator()(const training::ParticipationQuery& q) {
    const std::size_t n = cfg_.devices;
    const auto& s = cfg_.scheduler;
    const std::size_t k = s.k.value_or(n);
    const RngStream round = RngStream(cfg_.seed, "channel").child("round", q.round);
    RngStream fading = round.child("fading");
    const auto& m = net_.model;

    std::vector<double> fade(n), snr(n), full_rate(n);
    for (std::size_t i = 0; i < n; ++i) {
      fade[i] = fading.exponential(1.0);
      snr[i] = m.device_power_w * wireless::normalized_gain(fade[i], geometry_.distance(i), m);
      full_rate[i] = m.bandwidth_hz * std::log2(1.0 + snr[i]);
    }

    training::RoundPlan plan;
    bool own_rates = false;
    RngStream policy = round.child("policy");
    if (s.policy == "full") {
      for (std::size_t i = 0; i < n; ++i) plan.selected.push_back(i);
    } else if (s.policy == "random") {
      plan.selected = scheduling::random_schedule(n, k, policy);
    } else if (s.policy == "round_robin") {
      plan.selected = scheduling::round_robin_schedule(n, k, q.round - 1).devices;
    } else if (s.policy == "pf") {
      plan.selected = pf_.select(snr, k);
    } else if (s.policy == "latency_min") {
      plan.selected = scheduling::latency_min_schedule(full_rate, k);
    } else if (s.policy == "p2") {
      RngStream sub_rng = round.child("subchannels");
      const auto real = wireless::sample_realization(sub_, geometry_, net_.subchannels, sub_rng);
      scheduling::P2Inputs in;
      in.ages = *q.ages;
      in.gains.assign(n, std::vector<double>(net_.subchannels));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < net_.subchannels; ++c)
          in.gains[i][c] = wireless::normalized_gain(real.gains[i][c], geometry_.distance(i), sub_);
      in.subchannels = net_.subchannels;
      in.r_min = s.r_min;
      in.p_max = s.p_max;
      in.alpha_fair = s.alpha_fair;
      in.model = sub_;
      in.max_devices = s.k.value_or(0);
      const auto d = scheduling::p2_greedy_schedule(in);
      plan.selected = d.selected;
      plan.uplink_rate_bps = d.rates;
      own_rates = true;
    } else if (s.policy == "p4") {
      std::vector<scheduling::P4Candidate> cands;
      for (std::size_t i = 0; i < n; ++i) {
        RngStream crng = round.child("compute", i);
        cands.push_back({i, wireless::comm_latency(payload_bits_, full_rate[i]), compute(crng)});
      }
      const auto d = scheduling::p4_deadline_schedule(cands, s.t_max);
      plan.selected = d.selected;
      for (std::size_t i : plan.selected) plan.uplink_rate_bps.push_back(full_rate[i]);
      plan.rule = training::LatencyRule::pipelined;
      own_rates = true;
    } else {
      scheduling::UpdateAwareInputs in;
      in.channel_quality = full_rate;
      in.k = k;
      in.k_c = s.k_c.value_or(k);
      in.update_norms.resize(n);
      for (std::size_t i = 0; i < n; ++i) in.update_norms[i] = q.local_update(i).norm2();
      const double t_max = s.t_max;
      in.quantized_norm = [&, t_max](std::size_t i) {
        RngStream qrng = round.child("quantize", i);
        return scheduling::bn2c_quantized_norm(q.local_update(i), t_max * full_rate[i], qrng);
      };
      plan.selected = scheduling::update_aware_schedule(scheduling::update_aware_from_name(s.policy), in);
    }

    if (!own_rates) {
      // Selected devices share the band equally.
      const double share = m.bandwidth_hz / static_cast<double>(std::max<std::size_t>(plan.selected.size(), 1));
      const double noise = net_.noise_density_w_per_hz * share;
      for (std::size_t i : plan.selected) {
        const double g = m.device_power_w * fade[i] * std::pow(geometry_.distance(i), -m.path_loss_exp) / noise;
        plan.uplink_rate_bps.push_back(share * std::log2(1.0 + g));
      }
    }
    if (s.policy == "p4" || cfg_.channel.compute_s > 0.0 || cfg_.channel.compute_jitter_s > 0.0)
      for (std::size_t i : plan.selected) {
        RngStream crng = round.child("compute", i);
        plan.compute_s.push_back(compute(crng));
      }
    return plan;
  }

 private:
  double compute(RngStream& rng) const {
    return wireless::comp_latency({cfg_.channel.compute_s, cfg_.channel.compute_jitter_s}, rng);
  }

  const ExperimentConfig& cfg_;
  wireless::Fig1Network net_;
  wireless::ChannelModel sub_;
  wireless::DeviceGeometry geometry_;
  double payload_bits_;
  scheduling::PfTracker pf_;
};

// Scheduling without a channel model: only channel-free policies are valid here.
training::Participation plain_participation(const ExperimentConfig& cfg) {
  const auto& s = cfg.scheduler;
  const std::size_t n = cfg.devices;
  const std::size_t k = s.k.value_or(n);
  const std::uint64_t seed = cfg.seed;
  const std::string policy = s.policy;
  return [=](const training::ParticipationQuery& q) {
    training::RoundPlan plan;
    if (policy == "full") {
      for (std::size_t i = 0; i < n; ++i) plan.selected.push_back(i);
    } else if (policy == "random") {
      RngStream rng = RngStream(seed, "channel").child("round", q.round).child("policy");
      plan.selected = scheduling::random_schedule(n, k, rng);
    } else if (policy == "round_robin") {
      plan.selected = scheduling::round_robin_schedule(n, k, q.round - 1).devices;
    } else if (policy == "bn2") {
      scheduling::UpdateAwareInputs in;
      in.channel_quality.assign(n, 0.0);
      in.update_norms.resize(n);
      for (std::size_t i = 0; i < n; ++i) in.update_norms[i] = q.local_update(i).norm2();
      in.k = k;
      in.k_c = k;
      plan.selected = scheduling::update_aware_schedule(scheduling::UpdateAwarePolicy::bn2, in);
    } else {
      throw ContractViolation("scheduler.policy = " + policy + " needs a channel model");
    }
    return plan;
  };
}

topology::WeightMatrix mixing_matrix(const ExperimentConfig& cfg) {
  const std::size_t n = cfg.devices;
  const auto& g = cfg.topology.graph;
  if (g == "uniform") return topology::WeightMatrix::uniform(n);
  topology::Graph graph;
  if (g == "complete") graph = topology::complete_graph(n);
  else if (g == "ring") graph = topology::ring_graph(n);
  else if (g == "path") graph = topology::path_graph(n);
  else if (g == "star") graph = topology::star_graph(n);
  else if (g == "random") {
    RngStream rng = RngStream(cfg.seed, "topology");
    graph = topology::random_connected_graph(n, cfg.topology.edge_prob, rng);
  } else {
    graph = topology::parse_edge_list(read_text_file(cfg.topology.file));
  }
  COLEARN_REQUIRE(graph.size() == n, "topology: graph has " + std::to_string(graph.size()) + " nodes but devices.count = " +
                                         std::to_string(n));
  return topology::laplacian_weights(graph);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["artifact_version"] = artifact_version;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["loop"] = loop;
  j["rounds"] = rounds;
  j["canned"] = canned;
  j["canned_description"] = canned_description;
  j["started_utc"] = started_utc;
  j["wall_clock_s"] = wall_clock_s;
  return j.dump(2) + "\n";
}

training::Problem build_problem(const ExperimentConfig& cfg) {
  const RngStream root(cfg.seed, "experiment");
  RngStream data_rng = root.child("data");
  RngStream split_rng = root.child("split");
  RngStream shard_rng = root.child("shards");
  RngStream init_rng = root.child("init");
  const auto& t = cfg.task;
  Dataset data = t.kind == "regression" ? make_regression_data(t.samples, t.dim, t.noise, data_rng)
                                        : make_classification_data(t.samples, t.dim, t.classes, t.separation, data_rng);
  auto split = split_holdout(std::move(data), t.eval_fraction, split_rng);
  training::Problem p;
  p.loss = loss_model(t);
  p.shards = make_shards(split.train, cfg.devices,
                         cfg.sharding == "label_skew" ? ShardMode::label_skew : ShardMode::iid, shard_rng);
  p.eval = std::move(split.eval);
  p.initial = initial_params(p.loss, init_rng);
  return p;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult out;
  out.config_text = serialize_config(cfg);
  out.manifest.config_hash = hash_hex(fnv1a64(out.config_text));
  out.manifest.seed = cfg.seed;
  out.manifest.started_utc = utc_now();
  out.manifest.loop = cfg.train.loop;
  out.manifest.rounds = cfg.train.rounds;
  out.manifest.canned = cfg.channel.canned;
  if (cfg.channel.canned != "none") out.manifest.canned_description = wireless::canned_description(cfg.channel.canned);

  const training::Problem problem = build_problem(cfg);
  const training::TrainConfig tc = to_train_config(cfg);
  const double payload = cfg.channel.payload_bits > 0.0 ? cfg.channel.payload_bits
                                                        : dense_payload_bits(problem.initial.dim());

  training::Participation participation;
  if (cfg.channel.canned == "fig1") {
    auto sched = std::make_shared<CellScheduler>(cfg, payload);
    participation = [sched](const training::ParticipationQuery& q) { return (*sched)(q); };
  } else {
    participation = plain_participation(cfg);
  }

  std::optional<wireless::HflLatency> hfl_lat;
  wireless::HflLayout layout;
  if (cfg.channel.canned == "hfl") {
    wireless::HflNetwork net = wireless::hfl_network();
    net.devices = cfg.devices;
    if (cfg.hfl_clusters > 0) net.clusters = cfg.hfl_clusters;
    RngStream rng = RngStream(cfg.seed, "channel").child("layout");
    layout = wireless::hfl_layout(net, rng);
    hfl_lat = wireless::hfl_latency(net, layout, payload);
  }

  const auto& loop = cfg.train.loop;
  training::RunTrace trace;
  if (loop == "pssgd") {
    trace = training::run_pssgd(tc, problem);
  } else if (loop == "fedavg") {
    trace = training::run_fedavg(tc, problem, participation);
  } else if (loop == "compressed_ef") {
    trace = training::run_compressed_ef(tc, problem, participation);
  } else if (loop == "slowmo") {
    trace = training::run_slowmo(tc, problem, participation);
  } else if (loop == "signsgd") {
    trace = training::run_signsgd_mv(tc, problem);
  } else if (loop == "decentralized") {
    trace = training::run_decentralized(tc, problem, mixing_matrix(cfg));
  } else if (loop == "sync_sparse") {
    training::SyncSparseOptions o;
    o.phi = cfg.train.sync_phi;
    o.tau_max = cfg.train.sync_tau_max;
    trace = training::run_sync_sparse_avg(tc, problem, o);
  } else if (loop == "hfl") {
    training::HflOptions o;
    if (hfl_lat) {
      o.clusters = layout.members;
      const auto lat = *hfl_lat;
      o.latency = [lat](std::size_t, bool sync) { return lat.intra_round_s + (sync ? lat.sync_s : 0.0); };
    } else {
      const std::size_t l = cfg.hfl_clusters;
      o.clusters.assign(l, {});
      for (std::size_t i = 0; i < cfg.devices; ++i) o.clusters[i * l / cfg.devices].push_back(i);
    }
    trace = training::run_hfl(tc, problem, o);
  } else {
    throw ContractViolation("unknown train.loop '" + loop + "'");
  }

  // Under the two-tier network every flat loop is orchestrated by the macro server.
  if (hfl_lat && loop != "hfl")
    for (auto& r : trace.records) r.latency_s = r.scheduled.empty() ? 0.0 : hfl_lat->fedavg_round_s;

  out.trace = std::move(trace);
  out.manifest.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string resolve_out_dir(const ExperimentConfig& cfg, const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return cfg.out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  COLEARN_REQUIRE(static_cast<bool>(in), "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  COLEARN_REQUIRE(static_cast<bool>(out), "cannot write '" + path + "'");
  out << text;
  COLEARN_REQUIRE(static_cast<bool>(out), "failed writing '" + path + "'");
}

}  // namespace

WrittenRun write_run(const ExperimentResult& result, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  COLEARN_REQUIRE(!ec, "cannot create output directory '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  WrittenRun w{(base / "trace.tsv").string(), (base / "manifest.json").string(), (base / "config.ini").string()};
  write_text_file(w.trace_path, training::trace_to_tsv(result.trace));
  write_text_file(w.manifest_path, result.manifest.to_json());
  write_text_file(w.config_path, result.config_text);
  return w;
}

double metric_value(const training::RoundRecord& r, const std::string& metric) {
  if (metric == "train_loss") return r.train_loss;
  if (metric == "eval_metric") return r.eval_metric;
  if (metric == "latency_s") return r.latency_s;
  if (metric == "uplink_bytes") return static_cast<double>(r.uplink_bytes);
  if (metric == "downlink_bytes") return static_cast<double>(r.downlink_bytes);
  if (metric == "max_age") return static_cast<double>(r.max_age);
  throw ContractViolation("unknown metric '" + metric + "'");
}

CompareSummary compare_traces(const std::vector<std::pair<std::string, std::vector<training::RoundRecord>>>& traces,
                              const std::string& metric) {
  COLEARN_REQUIRE(traces.size() >= 2, "compare: need at least two traces");
  CompareSummary s;
  s.metric = metric;
  s.aligned_rounds = traces.front().second.size();
  for (const auto& [name, recs] : traces) {
    s.names.push_back(name);
    s.lengths.push_back(recs.size());
    s.aligned_rounds = std::min(s.aligned_rounds, recs.size());
    if (recs.size() != traces.front().second.size()) s.lengths_differ = true;
  }
  COLEARN_REQUIRE(s.aligned_rounds >= 1, "compare: a trace has no rounds");
  for (std::size_t t = 0; t < s.aligned_rounds; ++t) {
    std::vector<double> row;
    for (const auto& tr : traces) row.push_back(metric_value(tr.second[t], metric));
    s.values.push_back(std::move(row));
  }
  s.finals = s.values.back();
  double mean = 0.0;
  for (std::size_t j = 0; j < s.finals.size(); ++j) mean += (s.finals[j] - mean) / static_cast<double>(j + 1);
  double ss = 0.0;
  for (double x : s.finals) ss += (x - mean) * (x - mean);
  s.mean = mean;
  s.sd = std::sqrt(ss / static_cast<double>(s.finals.size() - 1));
  return s;
}

CompareSummary compare_runs(const std::vector<std::string>& paths, const std::string& metric) {
  std::vector<std::pair<std::string, std::vector<training::RoundRecord>>> traces;
  for (const auto& p : paths) {
    try {
      traces.emplace_back(p, training::trace_from_tsv(read_text_file(p)));
    } catch (const ContractViolation& e) {
      throw ContractViolation(p + ": " + e.what());
    }
  }
  return compare_traces(traces, metric);
}

std::string mean_sd_text(double mean, double sd) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.4f \xC2\xB1 %.4f", mean, sd);
  return buf;
}

std::string render_compare(const CompareSummary& s) {
  std::ostringstream out;
  out << "round";
  for (std::size_t j = 0; j < s.names.size(); ++j) out << "\ttrace" << j + 1;
  out << "\tmax_abs_diff\n";
  for (std::size_t t = 0; t < s.values.size(); ++t) {
    out << t + 1;
    double lo = s.values[t].front(), hi = lo;
    for (double v : s.values[t]) {
      out << '\t' << training::format_real(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out << '\t' << training::format_real(hi - lo) << '\n';
  }
  out << "\n";
  for (std::size_t j = 0; j < s.names.size(); ++j)
    out << "trace" << j + 1 << "\t" << s.names[j] << "\trounds=" << s.lengths[j] << "\tfinal "
        << s.metric << "=" << training::format_real(s.finals[j]) << "\n";
  if (s.lengths_differ)
    out << "warning: traces differ in length; aligned on the first " << s.aligned_rounds << " rounds\n";
  out << s.metric << " final (mean \xC2\xB1 sd over " << s.finals.size() << " traces): " << mean_sd_text(s.mean, s.sd)
      << "\n";
  return out.str();
}

}  // namespace colearn::harness
