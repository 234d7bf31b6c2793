#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "colearn/compression/compressor.hpp"
#include "colearn/training/trainer.hpp"

namespace colearn::harness {

struct TaskSection {
  std::string kind = "regression";  // regression | classification
  std::string model = "quadratic";  // quadratic | logistic | perceptron
  std::size_t samples = 500;
  std::size_t dim = 10;
  std::size_t classes = 2;
  std::size_t hidden = 16;
  double noise = 0.1;
  double separation = 2.0;
  double eval_fraction = 0.2;

  bool operator==(const TaskSection&) const = default;
};

struct TrainSection {
  std::string loop = "fedavg";  // pssgd | fedavg | compressed_ef | signsgd | slowmo | decentralized | sync_sparse | hfl
  std::size_t rounds = 100;
  std::size_t local_steps = 1;
  double lr = 0.1;
  std::string lr_rule = "constant";  // constant | step
  std::size_t lr_step_every = 0;
  double lr_step_factor = 0.1;
  std::size_t batch_size = 1;
  std::string optimizer = "plain";  // plain | momentum
  double momentum = 0.9;
  double slowmo_alpha = 1.0;
  double slowmo_beta = 0.0;
  bool weight_by_size = false;
  std::size_t sync_period = 1;  // HFL inter-cluster period
  double sync_phi = 1.0;        // synchronous sparse averaging level
  std::size_t sync_tau_max = 1;

  bool operator==(const TrainSection&) const = default;
};

struct CompressorSection {
  std::string scheme = "identity";
  std::size_t k = 1;
  std::size_t r = 1;
  std::uint32_t levels = 1;
  double eps = 1.0;
  double phi = 1.0;
  std::size_t tau_max = 1;
  std::size_t blocks = 1;
  double threshold = 0.0;
  bool rescale = false;

  compression::CompressorSpec to_spec() const;
  bool operator==(const CompressorSection&) const = default;
};

struct TopologySection {
  std::string graph = "complete";  // complete | ring | path | star | random | uniform | file
  double edge_prob = 0.5;
  std::string file;

  bool operator==(const TopologySection&) const = default;
};

struct ChannelSection {
  std::string canned = "none";  // none | fig1 | hfl
  double payload_bits = 0.0;    // 0: serialized model size
  double compute_s = 0.0;
  double compute_jitter_s = 0.0;

  bool operator==(const ChannelSection&) const = default;
};

struct SchedulerSection {
  std::string policy = "full";
  std::optional<std::size_t> k;
  std::optional<std::size_t> k_c;
  double alpha_fair = 0.0;
  double r_min = 0.0;
  double p_max = 0.0;
  double t_max = 0.0;
  double pf_factor = 0.1;

  bool operator==(const SchedulerSection&) const = default;
};

struct ExperimentConfig {
  TaskSection task;
  std::size_t devices = 10;
  std::string sharding = "iid";  // iid | label_skew
  TrainSection train;
  std::optional<CompressorSection> uplink;
  std::optional<CompressorSection> downlink;
  TopologySection topology;
  std::size_t hfl_clusters = 0;  // contiguous partition when no canned layout is used
  ChannelSection channel;
  SchedulerSection scheduler;
  std::uint64_t seed = 0;
  std::string out = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

struct ConfigIssue {
  std::size_t line = 0;  // 0 when the issue concerns a missing key
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

// Grammar: '[section]' headers, 'key = value' lines, '#' comments. Keys are
// section.key; a dotted key may also appear outside any section.
// Returns every issue found; an empty list means the text parses.
std::vector<ConfigIssue> check_config(const std::string& text);

// Throws ConfigError carrying the complete issue list.
ExperimentConfig parse_config(const std::string& text);

// Canonical text: every key in a fixed order, reals with 17 significant digits.
std::string serialize_config(const ExperimentConfig& cfg);

std::string format_issues(const std::vector<ConfigIssue>& issues);

// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(std::uint64_t h);

training::TrainConfig to_train_config(const ExperimentConfig& cfg);

}  // namespace colearn::harness
