#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "colearn/compression/compressor.hpp"
#include "colearn/numerics/data.hpp"
#include "colearn/numerics/dense_vector.hpp"
#include "colearn/numerics/loss.hpp"
#include "colearn/numerics/rng.hpp"
#include "colearn/topology/graph.hpp"

namespace colearn::training {

enum class LrRule { constant, step };

struct LrSchedule {
  double eta0 = 0.1;
  LrRule rule = LrRule::constant;
  std::size_t step_every = 0;  // rounds between decays
  double step_factor = 0.1;

  // Rate for 1-based round t.
  double at(std::size_t t) const;
};

enum class Optimizer { plain, momentum };

struct TrainConfig {
  std::size_t rounds = 1;       // T
  std::size_t local_steps = 1;  // H
  LrSchedule lr;
  std::size_t batch_size = 1;   // 0 means the full shard
  Optimizer optimizer = Optimizer::plain;
  double momentum = 0.9;        // local momentum factor
  double slowmo_alpha = 1.0;
  double slowmo_beta = 0.0;
  std::optional<compression::CompressorSpec> uplink;
  std::optional<compression::CompressorSpec> downlink;
  bool weight_by_size = false;  // FedAvg weights |D_i| instead of uniform
  std::size_t sync_period = 1;  // inter-cluster averaging period for HFL
  std::uint64_t seed = 0;

  void validate() const;
};

struct Problem {
  LossModel loss;
  std::vector<DataShard> shards;  // shards[i] belongs to device i
  Dataset eval;
  DenseVector initial;

  std::size_t devices() const noexcept { return shards.size(); }
  void validate() const;
};

enum class LatencyRule { parallel, pipelined };

// Selected devices with their link and compute figures for one round.
// Empty rate vectors mean latency is not modelled.
struct RoundPlan {
  std::vector<std::size_t> selected;
  std::vector<double> uplink_rate_bps;  // aligned with selected
  std::vector<double> compute_s;        // aligned with selected
  double downlink_rate_bps = 0.0;       // 0: downlink time not modelled
  LatencyRule rule = LatencyRule::parallel;
};

// parallel: max_i(comp_i + bits_i / R_i); pipelined: T_i = max(T_{i-1}, comp_i) + bits_i / R_i.
// Plus downlink_bits / downlink_rate when a downlink rate is given.
double round_latency(const RoundPlan& plan, const std::vector<double>& uplink_bits, double downlink_bits);

struct ParticipationQuery {
  std::size_t round = 1;  // 1-based
  std::size_t devices = 0;
  const std::vector<std::size_t>* ages = nullptr;
  // Local update direction of device i at the current global model.
  std::function<const DenseVector&(std::size_t)> local_update;
};

using Participation = std::function<RoundPlan(const ParticipationQuery&)>;

Participation full_participation();

struct RoundRecord {
  std::size_t round = 0;
  double train_loss = 0.0;
  double eval_metric = 0.0;
  std::vector<std::size_t> scheduled;
  std::uint64_t uplink_bytes = 0;
  std::uint64_t downlink_bytes = 0;
  double latency_s = 0.0;
  std::vector<std::size_t> ages;
  std::size_t max_age = 0;
};

struct RunTrace {
  std::vector<RoundRecord> records;
  DenseVector final_model;
  std::vector<DenseVector> device_models;  // per-device models for decentralized loops
  std::vector<std::size_t> participation;  // times each device was scheduled
  bool devices_synchronized = true;        // every device copy equalled the global model each round

  double total_latency() const;
};

// Called after each round with the 1-based round index and the device models.
using RoundObserver = std::function<void(std::size_t, const std::vector<DenseVector>&)>;

RunTrace run_pssgd(const TrainConfig& cfg, const Problem& problem);
RunTrace run_fedavg(const TrainConfig& cfg, const Problem& problem, const Participation& participation);
RunTrace run_compressed_ef(const TrainConfig& cfg, const Problem& problem, const Participation& participation);
RunTrace run_signsgd_mv(const TrainConfig& cfg, const Problem& problem);
RunTrace run_slowmo(const TrainConfig& cfg, const Problem& problem, const Participation& participation);
RunTrace run_decentralized(const TrainConfig& cfg, const Problem& problem, const topology::WeightMatrix& w,
                           const RoundObserver& observer = {});

struct SyncSparseOptions {
  double phi = 1.0;
  std::size_t tau_max = 1;
  // Test hook: replaces the schedule; returns 0/1 per coordinate for round t.
  std::function<std::vector<std::uint8_t>(std::size_t)> mask_override;
  RoundObserver observer;
};

RunTrace run_sync_sparse_avg(const TrainConfig& cfg, const Problem& problem, const SyncSparseOptions& options);

struct HflOptions {
  std::vector<std::vector<std::size_t>> clusters;  // partition of the device ids
  // Seconds for one round; `sync` is true on inter-cluster averaging rounds.
  std::function<double(std::size_t round, bool sync)> latency;
};

RunTrace run_hfl(const TrainConfig& cfg, const Problem& problem, const HflOptions& options);

// Tab-separated trace: a header row then one row per round with the fields
// round, train_loss, eval_metric, scheduled_ids, uplink_bytes, downlink_bytes,
// latency_s, max_age. Reals use %.9g; scheduled ids are ';'-joined or '-'.
std::string trace_to_tsv(const RunTrace& trace);
std::vector<RoundRecord> trace_from_tsv(const std::string& text);
std::string format_real(double x);

inline constexpr const char* kTraceHeader =
    "round\ttrain_loss\teval_metric\tscheduled_ids\tuplink_bytes\tdownlink_bytes\tlatency_s\tmax_age";

}  // namespace colearn::training
