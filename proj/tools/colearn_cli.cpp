#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "colearn/error.hpp"
#include "colearn/harness/config.hpp"
#include "colearn/harness/experiment.hpp"
#include "colearn/wireless/canned.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out) {
  using namespace colearn::harness;
  ExperimentConfig cfg;
  try {
    cfg = parse_config(read_text_file(path));
  } catch (const ConfigError& e) {
    std::cerr << path << ":\n" << format_issues(e.issues());
    return kExitConfig;
  } catch (const colearn::ContractViolation& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
  if (seed) cfg.seed = *seed;
  const ExperimentResult result = run_experiment(cfg);
  const WrittenRun w = write_run(result, resolve_out_dir(cfg, out));
  const auto& last = result.trace.records.back();
  std::cout << "trace " << w.trace_path << "\nmanifest " << w.manifest_path << "\nconfig_hash "
            << result.manifest.config_hash << "\nfinal train_loss " << colearn::training::format_real(last.train_loss)
            << " eval_metric " << colearn::training::format_real(last.eval_metric) << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  using namespace colearn::harness;
  const auto issues = check_config(read_text_file(path));
  if (issues.empty()) {
    std::cout << path << ": ok\n";
    return kExitOk;
  }
  std::cerr << path << ":\n" << format_issues(issues);
  return kExitConfig;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& metric) {
  using namespace colearn::harness;
  std::cout << render_compare(compare_runs(paths, metric));
  return kExitOk;
}

int cmd_canned_list() {
  for (const auto& name : colearn::wireless::canned_names())
    std::cout << name << "\t" << colearn::wireless::canned_description(name) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative learning over wireless networks: simulation harness"};
  app.require_subcommand(1);

  std::string run_config;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_out;
  auto* run = app.add_subcommand("run", "Run one experiment and write trace, manifest and canonical config");
  run->add_option("config", run_config, "Experiment config file")->required();
  run->add_option("--seed", run_seed, "Override run.seed");
  run->add_option("--out", run_out, "Output directory (overrides COLEARN_OUT_DIR and run.out)");

  std::vector<std::string> traces;
  std::string metric = "eval_metric";
  auto* compare = app.add_subcommand("compare", "Align traces per round and summarize final values");
  compare->add_option("traces", traces, "Trace files")->required()->expected(2, -1);
  compare->add_option("--metric", metric, "train_loss | eval_metric | latency_s | uplink_bytes | downlink_bytes | max_age");

  auto* canned = app.add_subcommand("canned", "Canned channel configurations");
  canned->require_subcommand(1);
  auto* canned_list = canned->add_subcommand("list", "List canned configurations");

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a config and report every issue");
  validate->add_option("config", validate_config, "Experiment config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_config, run_seed, run_out);
    if (*compare) return cmd_compare(traces, metric);
    if (*canned_list) return cmd_canned_list();
    if (*validate) return cmd_validate(validate_config);
  } catch (const colearn::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const colearn::DecodeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
