#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "colearn/harness/config.hpp"
#include "colearn/training/trainer.hpp"

namespace colearn::harness {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "COLEARN_OUT_DIR";

struct RunManifest {
  std::string config_hash;  // FNV-1a 64 of the canonical config text
  std::uint64_t seed = 0;
  std::string artifact_version = kArtifactVersion;
  double wall_clock_s = 0.0;
  std::string started_utc;
  std::string loop;
  std::size_t rounds = 0;
  std::string canned;  // canned channel configuration, or "none"
  std::string canned_description;

  std::string to_json() const;
};

struct ExperimentResult {
  training::RunTrace trace;
  RunManifest manifest;
  std::string config_text;  // canonical serialization the hash was taken over
};

// Synthesizes the data, shards it, and builds the training problem.
training::Problem build_problem(const ExperimentConfig& cfg);

// Runs the configured loop; throws ContractViolation on module errors.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Output directory precedence: explicit argument, then the environment variable, then the config.
std::string resolve_out_dir(const ExperimentConfig& cfg, const std::optional<std::string>& explicit_dir);

struct WrittenRun {
  std::string trace_path;
  std::string manifest_path;
  std::string config_path;
};

// Writes trace.tsv, manifest.json and config.ini into `dir` (created if needed).
WrittenRun write_run(const ExperimentResult& result, const std::string& dir);

std::string read_text_file(const std::string& path);

struct CompareSummary {
  std::string metric;
  std::vector<std::string> names;
  std::vector<std::size_t> lengths;
  std::size_t aligned_rounds = 0;
  bool lengths_differ = false;
  std::vector<std::vector<double>> values;  // [round][trace]
  std::vector<double> finals;               // last aligned value per trace
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation of the finals
};

double metric_value(const training::RoundRecord& r, const std::string& metric);

CompareSummary compare_traces(const std::vector<std::pair<std::string, std::vector<training::RoundRecord>>>& traces,
                              const std::string& metric);

// Loads each path with trace_from_tsv; throws ContractViolation on schema mismatch.
CompareSummary compare_runs(const std::vector<std::string>& paths, const std::string& metric);

// Per-round aligned table followed by the final values and mean +- sd.
std::string render_compare(const CompareSummary& s);

std::string mean_sd_text(double mean, double sd);

}  // namespace colearn::harness
