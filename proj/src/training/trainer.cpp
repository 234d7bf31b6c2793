#include "colearn/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "colearn/compression/quantize.hpp"
#include "colearn/compression/sparsify.hpp"
#include "colearn/error.hpp"
#include "colearn/scheduling/policies.hpp"

namespace colearn::training {

double LrSchedule::at(std::size_t t) const {
  COLEARN_REQUIRE(t >= 1, "LrSchedule: rounds are 1-based");
  if (rule == LrRule::constant || step_every == 0) return eta0;
  const auto decays = static_cast<double>((t - 1) / step_every);
  return eta0 * std::pow(step_factor, decays);
}

void TrainConfig::validate() const {
  COLEARN_REQUIRE(rounds >= 1, "TrainConfig: rounds must be at least 1");
  COLEARN_REQUIRE(local_steps >= 1, "TrainConfig: local_steps must be at least 1");
  COLEARN_REQUIRE(lr.eta0 > 0.0 && std::isfinite(lr.eta0), "TrainConfig: learning rate must be positive");
  COLEARN_REQUIRE(lr.rule == LrRule::constant || (lr.step_factor > 0.0 && lr.step_factor <= 1.0),
                  "TrainConfig: step_factor must lie in (0, 1]");
  COLEARN_REQUIRE(momentum >= 0.0 && momentum < 1.0, "TrainConfig: momentum must lie in [0, 1)");
  COLEARN_REQUIRE(slowmo_alpha > 0.0, "TrainConfig: slowmo_alpha must be positive");
  COLEARN_REQUIRE(slowmo_beta >= 0.0 && slowmo_beta < 1.0, "TrainConfig: slowmo_beta must lie in [0, 1)");
  COLEARN_REQUIRE(sync_period >= 1, "TrainConfig: sync_period must be at least 1");
}

void Problem::validate() const {
  COLEARN_REQUIRE(!shards.empty(), "Problem: need at least one device");
  COLEARN_REQUIRE(initial.dim() == loss.param_dim(), "Problem: initial model has the wrong dimension");
  for (const auto& s : shards) COLEARN_REQUIRE(s.size() > 0, "Problem: every shard needs at least one sample");
}

double round_latency(const RoundPlan& plan, const std::vector<double>& uplink_bits, double downlink_bits) {
  const std::size_t n = plan.selected.size();
  COLEARN_REQUIRE(uplink_bits.size() == n, "round_latency: uplink bits do not match the selection");
  const bool rates = !plan.uplink_rate_bps.empty();
  const bool comp = !plan.compute_s.empty();
  COLEARN_REQUIRE(!rates || plan.uplink_rate_bps.size() == n, "round_latency: rates do not match the selection");
  COLEARN_REQUIRE(!comp || plan.compute_s.size() == n, "round_latency: compute times do not match the selection");
  double t = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double comm = 0.0;
    if (rates) {
      const double r = plan.uplink_rate_bps[j];
      COLEARN_REQUIRE(r >= 0.0, "round_latency: rates must be nonnegative");
      comm = uplink_bits[j] == 0.0 ? 0.0 : (r == 0.0 ? INFINITY : uplink_bits[j] / r);
    }
    const double c = comp ? plan.compute_s[j] : 0.0;
    COLEARN_REQUIRE(c >= 0.0, "round_latency: compute times must be nonnegative");
    t = plan.rule == LatencyRule::parallel ? std::max(t, c + comm) : std::max(t, c) + comm;
  }
  if (plan.downlink_rate_bps > 0.0) t += downlink_bits / plan.downlink_rate_bps;
  return t;
}

Participation full_participation() {
  return [](const ParticipationQuery& q) {
    RoundPlan plan;
    plan.selected.resize(q.devices);
    for (std::size_t i = 0; i < q.devices; ++i) plan.selected[i] = i;
    return plan;
  };
}

double RunTrace::total_latency() const {
  double t = 0.0;
  for (const auto& r : records) t += r.latency_s;
  return t;
}

namespace {

// Wire size of an uncompressed message: scheme tag, dimension, raw doubles.
std::uint64_t dense_wire_bytes(std::size_t d) { return 1 + 4 + 8 * static_cast<std::uint64_t>(d); }

class Engine {
 public:
  Engine(const TrainConfig& cfg, const Problem& problem) : cfg_(cfg), p_(problem), base_(cfg.seed, "train") {
    cfg.validate();
    problem.validate();
    for (const auto& s : problem.shards) train_.insert(train_.end(), s.samples.begin(), s.samples.end());
    ages_.assign(problem.devices(), 0);
    participation_.assign(problem.devices(), 0);
  }

  std::size_t devices() const { return p_.devices(); }
  std::size_t dim() const { return p_.initial.dim(); }
  const std::vector<std::size_t>& ages() const { return ages_; }

  RngStream device_stream(std::size_t i, std::size_t t) const { return base_.child("device", i).child("round", t); }
  RngStream compress_stream(std::size_t i, std::size_t t) const {
    return RngStream(cfg_.seed, "compress").child("device", i).child("round", t);
  }
  RngStream server_stream(std::size_t t) const { return RngStream(cfg_.seed, "server").child("round", t); }

  // Minibatch drawn with replacement; batch_size 0 returns the full shard.
  std::span<const Sample> batch(std::size_t i, RngStream& rng, std::vector<Sample>& storage) const {
    const auto& shard = p_.shards[i].samples;
    if (cfg_.batch_size == 0) return shard;
    storage.clear();
    for (std::size_t b = 0; b < cfg_.batch_size; ++b) storage.push_back(shard[rng.uniform_index(shard.size())]);
    return storage;
  }

  DenseVector gradient(const DenseVector& theta, std::size_t i, RngStream& rng) const {
    std::vector<Sample> storage;
    return grad(p_.loss, theta, batch(i, rng, storage));
  }

  // H local steps from theta; returns D = sum of applied steps divided by eta.
  DenseVector local_direction(const DenseVector& theta, std::size_t i, std::size_t t) const {
    RngStream rng = device_stream(i, t);
    const double eta = cfg_.lr.at(t);
    DenseVector local = theta;
    DenseVector dir(dim());
    DenseVector velocity(dim());
    for (std::size_t h = 0; h < cfg_.local_steps; ++h) {
      DenseVector g = gradient(local, i, rng);
      if (cfg_.optimizer == Optimizer::momentum) {
        velocity *= cfg_.momentum;
        velocity += g;
        g = velocity;
      }
      dir += g;
      if (h + 1 < cfg_.local_steps) local.axpy(-eta, g);
    }
    return dir;
  }

  void mean_add(RunningMean& m, const DenseVector& x, std::size_t i) const {
    if (cfg_.weight_by_size)
      m.add(x, static_cast<double>(p_.shards[i].size()));
    else
      m.add(x);
  }

  RoundRecord record(std::size_t t, const DenseVector& theta, std::vector<std::size_t> scheduled, std::uint64_t up,
                     std::uint64_t down, double latency) {
    std::sort(scheduled.begin(), scheduled.end());
    for (std::size_t i : scheduled) ++participation_[i];
    ages_ = scheduling::age_update(ages_, scheduled);
    RoundRecord r;
    r.round = t;
    r.train_loss = loss(p_.loss, theta, train_);
    r.eval_metric = p_.eval.empty() ? 0.0 : eval_metric(p_.loss, theta, p_.eval);
    r.scheduled = std::move(scheduled);
    r.uplink_bytes = up;
    r.downlink_bytes = down;
    r.latency_s = latency;
    r.ages = ages_;
    r.max_age = ages_.empty() ? 0 : *std::max_element(ages_.begin(), ages_.end());
    return r;
  }

  RunTrace finish(std::vector<RoundRecord> records, DenseVector model) const {
    RunTrace out;
    out.records = std::move(records);
    out.final_model = std::move(model);
    out.participation = participation_;
    return out;
  }

  ParticipationQuery query(std::size_t t, const DenseVector& theta, std::map<std::size_t, DenseVector>& cache) const {
    ParticipationQuery q;
    q.round = t;
    q.devices = devices();
    q.ages = &ages_;
    q.local_update = [this, t, &theta, &cache](std::size_t i) -> const DenseVector& {
      COLEARN_REQUIRE(i < devices(), "local_update: device out of range");
      auto it = cache.find(i);
      if (it == cache.end()) it = cache.emplace(i, local_direction(theta, i, t)).first;
      return it->second;
    };
    return q;
  }

  std::vector<std::size_t> checked_selection(const RoundPlan& plan) const {
    std::vector<std::size_t> ids = plan.selected;
    std::sort(ids.begin(), ids.end());
    COLEARN_REQUIRE(std::adjacent_find(ids.begin(), ids.end()) == ids.end(), "participation: duplicate device");
    for (std::size_t i : ids) COLEARN_REQUIRE(i < devices(), "participation: device out of range");
    return ids;
  }

  const TrainConfig& cfg() const { return cfg_; }
  const Problem& problem() const { return p_; }

 private:
  const TrainConfig& cfg_;
  const Problem& p_;
  RngStream base_;
  Dataset train_;
  std::vector<std::size_t> ages_;
  std::vector<std::size_t> participation_;
};

std::vector<double> bits_per_device(std::size_t n, std::uint64_t bytes) {
  return std::vector<double>(n, 8.0 * static_cast<double>(bytes));
}

DenseVector mean_of(const std::vector<DenseVector>& models) {
  RunningMean m(models.front().dim());
  for (const auto& x : models) m.add(x);
  return m.mean();
}

// Shared loop for FedAvg-style rounds: `apply` receives the aggregate direction.
template <typename Apply>
RunTrace server_loop(Engine& e, const Participation& participation, Apply apply) {
  DenseVector theta = e.problem().initial;
  std::vector<RoundRecord> records;
  const std::uint64_t msg = dense_wire_bytes(e.dim());
  for (std::size_t t = 1; t <= e.cfg().rounds; ++t) {
    const double eta = e.cfg().lr.at(t);
    std::map<std::size_t, DenseVector> cache;
    const RoundPlan plan = participation(e.query(t, theta, cache));
    const auto ids = e.checked_selection(plan);
    if (ids.empty()) {
      records.push_back(e.record(t, theta, {}, 0, 0, 0.0));
      continue;
    }
    RunningMean agg(e.dim());
    for (std::size_t i : ids) {
      auto it = cache.find(i);
      if (it == cache.end()) it = cache.emplace(i, e.local_direction(theta, i, t)).first;
      e.mean_add(agg, it->second, i);
    }
    apply(theta, eta, agg.mean());
    const std::uint64_t up = msg * ids.size();
    const double lat = round_latency(plan, bits_per_device(plan.selected.size(), msg), 8.0 * static_cast<double>(msg));
    records.push_back(e.record(t, theta, ids, up, msg * ids.size(), lat));
  }
  return e.finish(std::move(records), std::move(theta));
}

}  // namespace

RunTrace run_pssgd(const TrainConfig& cfg, const Problem& problem) {
  Engine e(cfg, problem);
  DenseVector theta = problem.initial;
  std::vector<RoundRecord> records;
  const std::uint64_t msg = dense_wire_bytes(e.dim());
  std::vector<std::size_t> all(e.devices());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    const double eta = cfg.lr.at(t);
    RunningMean agg(e.dim());
    for (std::size_t i = 0; i < e.devices(); ++i) {
      RngStream rng = e.device_stream(i, t);
      agg.add(e.gradient(theta, i, rng));
    }
    theta.axpy(-eta, agg.mean());
    records.push_back(e.record(t, theta, all, msg * all.size(), msg * all.size(), 0.0));
  }
  return e.finish(std::move(records), std::move(theta));
}

RunTrace run_fedavg(const TrainConfig& cfg, const Problem& problem, const Participation& participation) {
  Engine e(cfg, problem);
  return server_loop(e, participation,
                     [](DenseVector& theta, double eta, const DenseVector& g) { theta.axpy(-eta, g); });
}

RunTrace run_slowmo(const TrainConfig& cfg, const Problem& problem, const Participation& participation) {
  Engine e(cfg, problem);
  DenseVector m(problem.initial.dim());
  const double alpha = cfg.slowmo_alpha, beta = cfg.slowmo_beta;
  return server_loop(e, participation, [&](DenseVector& theta, double eta, const DenseVector& g) {
    m *= beta;
    m += g;
    theta.axpy(-(alpha * eta), m);
  });
}

RunTrace run_compressed_ef(const TrainConfig& cfg, const Problem& problem, const Participation& participation) {
  Engine e(cfg, problem);
  const std::size_t n = e.devices(), d = e.dim();
  const compression::CompressorSpec up_spec = cfg.uplink.value_or(compression::CompressorSpec{});
  up_spec.validate(d);
  if (cfg.downlink) cfg.downlink->validate(d);

  DenseVector theta = problem.initial;
  std::vector<DenseVector> copies(n, theta);
  std::vector<compression::ErrorState> errors;
  for (std::size_t i = 0; i < n; ++i) errors.emplace_back(d, i);
  compression::ErrorState server_error(d, n);
  bool synced = true;
  std::vector<RoundRecord> records;

  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    const double eta = cfg.lr.at(t);
    std::map<std::size_t, DenseVector> cache;
    const RoundPlan plan = participation(e.query(t, theta, cache));
    const auto ids = e.checked_selection(plan);
    if (ids.empty()) {
      records.push_back(e.record(t, theta, {}, 0, 0, 0.0));
      continue;
    }
    RunningMean agg(d);
    std::map<std::size_t, std::uint64_t> sent;
    std::uint64_t up = 0;
    for (std::size_t i : ids) {
      auto it = cache.find(i);
      if (it == cache.end()) it = cache.emplace(i, e.local_direction(copies[i], i, t)).first;
      RngStream rng = e.compress_stream(i, t);
      auto ef = compression::ef_compress(it->second, errors[i], up_spec, rng, t);
      errors[i] = std::move(ef.error);
      sent[i] = ef.message.byte_size();
      up += ef.message.byte_size();
      e.mean_add(agg, ef.message.dense, i);
    }
    DenseVector broadcast = agg.mean();
    std::uint64_t down_msg = dense_wire_bytes(d);
    if (cfg.downlink) {
      RngStream rng = e.server_stream(t);
      auto ef = compression::ef_compress(broadcast, server_error, *cfg.downlink, rng, t);
      server_error = std::move(ef.error);
      down_msg = ef.message.byte_size();
      broadcast = std::move(ef.message.dense);
    }
    theta.axpy(-eta, broadcast);
    for (auto& c : copies) {
      c.axpy(-eta, broadcast);
      synced = synced && c == theta;
    }
    std::vector<double> bits;
    for (std::size_t i : plan.selected) bits.push_back(8.0 * static_cast<double>(sent[i]));
    const double lat = round_latency(plan, bits, 8.0 * static_cast<double>(down_msg));
    records.push_back(e.record(t, theta, ids, up, down_msg * n, lat));
  }
  RunTrace out = e.finish(std::move(records), std::move(theta));
  out.devices_synchronized = synced;
  return out;
}

RunTrace run_signsgd_mv(const TrainConfig& cfg, const Problem& problem) {
  Engine e(cfg, problem);
  const std::size_t n = e.devices(), d = e.dim();
  compression::CompressorSpec sign_spec;
  sign_spec.scheme = compression::Scheme::sign;
  DenseVector theta = problem.initial;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<RoundRecord> records;
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    const double eta = cfg.lr.at(t);
    std::vector<std::vector<int>> votes;
    std::uint64_t up = 0;
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng = e.device_stream(i, t);
      const DenseVector g = e.gradient(theta, i, rng);
      RngStream crng = e.compress_stream(i, t);
      up += compression::compress(g, sign_spec, crng, t).byte_size();
      votes.push_back(compression::sign_quant(g, 0.0, compression::SignMode::sign));
    }
    const auto vote = compression::majority_vote(votes);
    DenseVector step(d);
    for (std::size_t k = 0; k < d; ++k) step[k] = static_cast<double>(vote[k]);
    theta.axpy(-eta, step);
    RngStream srng = e.server_stream(t);
    const std::uint64_t down = compression::compress(step, sign_spec, srng, t).byte_size();
    records.push_back(e.record(t, theta, all, up, down * n, 0.0));
  }
  return e.finish(std::move(records), std::move(theta));
}

RunTrace run_decentralized(const TrainConfig& cfg, const Problem& problem, const topology::WeightMatrix& w,
                           const RoundObserver& observer) {
  Engine e(cfg, problem);
  const std::size_t n = e.devices();
  COLEARN_REQUIRE(w.size() == n, "run_decentralized: weight matrix does not match device count");
  std::uint64_t links = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && w(i, j) != 0.0) ++links;
  const std::uint64_t msg = dense_wire_bytes(e.dim());
  std::vector<DenseVector> models(n, problem.initial);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<RoundRecord> records;
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    const double eta = cfg.lr.at(t);
    std::vector<DenseVector> grads;
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng = e.device_stream(i, t);
      grads.push_back(e.gradient(models[i], i, rng));
    }
    models = topology::consensus_step(models, w);
    for (std::size_t i = 0; i < n; ++i) models[i].axpy(-eta, grads[i]);
    if (observer) observer(t, models);
    records.push_back(e.record(t, mean_of(models), all, msg * links, 0, 0.0));
  }
  RunTrace out = e.finish(std::move(records), mean_of(models));
  out.device_models = std::move(models);
  out.devices_synchronized = false;
  return out;
}

RunTrace run_sync_sparse_avg(const TrainConfig& cfg, const Problem& problem, const SyncSparseOptions& options) {
  Engine e(cfg, problem);
  const std::size_t n = e.devices(), d = e.dim();
  compression::CompressorSpec spec;
  spec.scheme = compression::Scheme::sync_mask;
  spec.phi = options.phi;
  spec.tau_max = options.tau_max;
  if (!options.mask_override) spec.validate(d);

  std::vector<DenseVector> models(n, problem.initial);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<RoundRecord> records;
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    const double eta = cfg.lr.at(t);
    std::vector<DenseVector> half;
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng = e.device_stream(i, t);
      half.push_back(sgd_step(models[i], e.gradient(models[i], i, rng), eta));
    }
    std::vector<std::uint8_t> mask;
    if (options.mask_override) {
      mask = options.mask_override(t);
      COLEARN_REQUIRE(mask.size() == d, "run_sync_sparse_avg: mask override has the wrong dimension");
    } else {
      mask = compression::sync_mask_schedule(d, options.phi, options.tau_max, t).bits;
    }
    std::uint64_t up = 0;
    std::size_t nnz = 0;
    for (auto b : mask) nnz += b ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (options.mask_override) {
        up += dense_wire_bytes(nnz);
      } else {
        RngStream crng = e.compress_stream(i, t);
        up += compression::compress(half[i], spec, crng, t).byte_size();
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      if (!mask[k]) {
        for (std::size_t i = 0; i < n; ++i) models[i][k] = half[i][k];
        continue;
      }
      double avg = 0.0;
      for (std::size_t i = 0; i < n; ++i) avg += (half[i][k] - avg) / static_cast<double>(i + 1);
      for (std::size_t i = 0; i < n; ++i) models[i][k] = avg;
    }
    if (options.observer) options.observer(t, models);
    records.push_back(e.record(t, mean_of(models), all, up, up, 0.0));
  }
  RunTrace out = e.finish(std::move(records), mean_of(models));
  out.device_models = std::move(models);
  out.devices_synchronized = false;
  return out;
}

RunTrace run_hfl(const TrainConfig& cfg, const Problem& problem, const HflOptions& options) {
  Engine e(cfg, problem);
  const std::size_t n = e.devices(), d = e.dim();
  COLEARN_REQUIRE(!options.clusters.empty(), "run_hfl: need at least one cluster");
  std::vector<std::uint8_t> seen(n, 0);
  for (const auto& c : options.clusters) {
    COLEARN_REQUIRE(!c.empty(), "run_hfl: clusters must be nonempty");
    for (std::size_t i : c) {
      COLEARN_REQUIRE(i < n, "run_hfl: device out of range");
      COLEARN_REQUIRE(!seen[i], "run_hfl: clusters overlap");
      seen[i] = 1;
    }
  }
  for (auto s : seen) COLEARN_REQUIRE(s, "run_hfl: clusters must cover every device");

  const std::size_t clusters = options.clusters.size();
  const std::uint64_t msg = dense_wire_bytes(d);
  DenseVector theta = problem.initial;
  std::vector<DenseVector> acc(clusters, DenseVector(d));
  double eta_sync = cfg.lr.at(1);
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::vector<RoundRecord> records;

  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    const double eta = cfg.lr.at(t);
    if ((t - 1) % cfg.sync_period == 0) {
      eta_sync = eta;
      for (auto& a : acc) a = DenseVector(d);
    }
    for (std::size_t l = 0; l < clusters; ++l) {
      DenseVector local = theta;
      local.axpy(-eta_sync, acc[l]);
      std::vector<std::size_t> members = options.clusters[l];
      std::sort(members.begin(), members.end());
      RunningMean m(d);
      for (std::size_t i : members) e.mean_add(m, e.local_direction(local, i, t), i);
      acc[l].axpy(eta / eta_sync, m.mean());
    }
    const bool sync = t % cfg.sync_period == 0;
    RunningMean global(d);
    for (const auto& a : acc) global.add(a);
    DenseVector view = theta;
    view.axpy(-eta_sync, global.mean());
    if (sync) theta = view;
    std::uint64_t up = msg * n, down = msg * n;
    if (sync && clusters > 1) {
      up += msg * clusters;
      down += msg * clusters;
    }
    const double lat = options.latency ? options.latency(t, sync) : 0.0;
    records.push_back(e.record(t, view, all, up, down, lat));
  }
  if (cfg.rounds % cfg.sync_period != 0) {
    RunningMean global(d);
    for (const auto& a : acc) global.add(a);
    theta.axpy(-eta_sync, global.mean());
  }
  return e.finish(std::move(records), std::move(theta));
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string trace_to_tsv(const RunTrace& trace) {
  std::ostringstream out;
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.round << '\t' << format_real(r.train_loss) << '\t' << format_real(r.eval_metric) << '\t';
    if (r.scheduled.empty()) {
      out << '-';
    } else {
      for (std::size_t j = 0; j < r.scheduled.size(); ++j) out << (j ? ";" : "") << r.scheduled[j];
    }
    out << '\t' << r.uplink_bytes << '\t' << r.downlink_bytes << '\t' << format_real(r.latency_s) << '\t' << r.max_age
        << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  COLEARN_REQUIRE(!s.empty() && s.find_first_not_of("0123456789") == std::string::npos,
                  "trace line " + std::to_string(line) + ": expected an unsigned integer, got '" + s + "'");
  return std::stoull(s);
}

double parse_real(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  COLEARN_REQUIRE(!s.empty() && end == s.c_str() + s.size(),
                  "trace line " + std::to_string(line) + ": expected a real, got '" + s + "'");
  return v;
}

}  // namespace

std::vector<RoundRecord> trace_from_tsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  COLEARN_REQUIRE(std::getline(in, line) && line == kTraceHeader, "trace: missing or malformed header");
  std::vector<RoundRecord> out;
  std::size_t no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    COLEARN_REQUIRE(f.size() == 8, "trace line " + std::to_string(no) + ": expected 8 fields");
    RoundRecord r;
    r.round = parse_uint(f[0], no);
    r.train_loss = parse_real(f[1], no);
    r.eval_metric = parse_real(f[2], no);
    if (f[3] != "-")
      for (const auto& id : split(f[3], ';')) r.scheduled.push_back(parse_uint(id, no));
    r.uplink_bytes = parse_uint(f[4], no);
    r.downlink_bytes = parse_uint(f[5], no);
    r.latency_s = parse_real(f[6], no);
    r.max_age = parse_uint(f[7], no);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace colearn::training
