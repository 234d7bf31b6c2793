#include "colearn/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include "colearn/error.hpp"
#include "colearn/numerics/loss.hpp"

namespace colearn::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t to_uint(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw BadValue("expected a nonnegative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw BadValue("integer out of range: '" + v + "'");
  }
}

double to_real(const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) throw BadValue("expected a real, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw BadValue("expected true or false, got '" + v + "'");
}

std::string to_choice(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw BadValue("'" + v + "' is not one of: " + list);
}

std::string real_text(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Getter = std::function<std::optional<std::string>(const ExperimentConfig&)>;

struct Field {
  std::string key;
  Setter set;
  Getter get;
};

template <typename T>
void add_uint(std::vector<Field>& f, const std::string& key, T ExperimentConfig::*sec, std::size_t T::*m) {
  f.push_back({key, [sec, m](ExperimentConfig& c, const std::string& v) { (c.*sec).*m = to_uint(v); },
               [sec, m](const ExperimentConfig& c) -> std::optional<std::string> { return std::to_string((c.*sec).*m); }});
}

template <typename T>
void add_real(std::vector<Field>& f, const std::string& key, T ExperimentConfig::*sec, double T::*m) {
  f.push_back({key, [sec, m](ExperimentConfig& c, const std::string& v) { (c.*sec).*m = to_real(v); },
               [sec, m](const ExperimentConfig& c) -> std::optional<std::string> { return real_text((c.*sec).*m); }});
}

template <typename T>
void add_bool(std::vector<Field>& f, const std::string& key, T ExperimentConfig::*sec, bool T::*m) {
  f.push_back({key, [sec, m](ExperimentConfig& c, const std::string& v) { (c.*sec).*m = to_bool(v); },
               [sec, m](const ExperimentConfig& c) -> std::optional<std::string> {
                 return (c.*sec).*m ? "true" : "false";
               }});
}

template <typename T>
void add_choice(std::vector<Field>& f, const std::string& key, T ExperimentConfig::*sec, std::string T::*m,
                std::initializer_list<const char*> allowed) {
  std::vector<std::string> keep(allowed.begin(), allowed.end());
  f.push_back({key,
               [sec, m, keep](ExperimentConfig& c, const std::string& v) {
                 if (std::find(keep.begin(), keep.end(), v) == keep.end()) {
                   std::string list;
                   for (const auto& a : keep) list += (list.empty() ? "" : ", ") + a;
                   throw BadValue("'" + v + "' is not one of: " + list);
                 }
                 (c.*sec).*m = v;
               },
               [sec, m](const ExperimentConfig& c) -> std::optional<std::string> { return (c.*sec).*m; }});
}

void add_compressor(std::vector<Field>& f, const std::string& prefix,
                    std::optional<CompressorSection> ExperimentConfig::*slot) {
  auto field = [&](const std::string& name, std::function<void(CompressorSection&, const std::string&)> set,
                   std::function<std::string(const CompressorSection&)> get) {
    f.push_back({prefix + "." + name,
                 [slot, set](ExperimentConfig& c, const std::string& v) {
                   if (!(c.*slot)) c.*slot = CompressorSection{};
                   set(*(c.*slot), v);
                 },
                 [slot, get](const ExperimentConfig& c) -> std::optional<std::string> {
                   if (!(c.*slot)) return std::nullopt;
                   return get(*(c.*slot));
                 }});
  };
  field(
      "scheme",
      [](CompressorSection& s, const std::string& v) {
        if (!compression::scheme_from_name(v)) throw BadValue("unknown compressor scheme '" + v + "'");
        s.scheme = v;
      },
      [](const CompressorSection& s) { return s.scheme; });
  field("k", [](CompressorSection& s, const std::string& v) { s.k = to_uint(v); },
        [](const CompressorSection& s) { return std::to_string(s.k); });
  field("r", [](CompressorSection& s, const std::string& v) { s.r = to_uint(v); },
        [](const CompressorSection& s) { return std::to_string(s.r); });
  field(
      "levels",
      [](CompressorSection& s, const std::string& v) {
        const auto x = to_uint(v);
        if (x > UINT32_MAX) throw BadValue("levels out of range");
        s.levels = static_cast<std::uint32_t>(x);
      },
      [](const CompressorSection& s) { return std::to_string(s.levels); });
  field("eps", [](CompressorSection& s, const std::string& v) { s.eps = to_real(v); },
        [](const CompressorSection& s) { return real_text(s.eps); });
  field("phi", [](CompressorSection& s, const std::string& v) { s.phi = to_real(v); },
        [](const CompressorSection& s) { return real_text(s.phi); });
  field("tau_max", [](CompressorSection& s, const std::string& v) { s.tau_max = to_uint(v); },
        [](const CompressorSection& s) { return std::to_string(s.tau_max); });
  field("blocks", [](CompressorSection& s, const std::string& v) { s.blocks = to_uint(v); },
        [](const CompressorSection& s) { return std::to_string(s.blocks); });
  field("threshold", [](CompressorSection& s, const std::string& v) { s.threshold = to_real(v); },
        [](const CompressorSection& s) { return real_text(s.threshold); });
  field("rescale", [](CompressorSection& s, const std::string& v) { s.rescale = to_bool(v); },
        [](const CompressorSection& s) { return std::string(s.rescale ? "true" : "false"); });
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    using C = ExperimentConfig;
    add_choice(f, "task.kind", &C::task, &TaskSection::kind, {"regression", "classification"});
    add_choice(f, "task.model", &C::task, &TaskSection::model, {"quadratic", "logistic", "perceptron"});
    add_uint(f, "task.samples", &C::task, &TaskSection::samples);
    add_uint(f, "task.dim", &C::task, &TaskSection::dim);
    add_uint(f, "task.classes", &C::task, &TaskSection::classes);
    add_uint(f, "task.hidden", &C::task, &TaskSection::hidden);
    add_real(f, "task.noise", &C::task, &TaskSection::noise);
    add_real(f, "task.separation", &C::task, &TaskSection::separation);
    add_real(f, "task.eval_fraction", &C::task, &TaskSection::eval_fraction);

    f.push_back({"devices.count", [](C& c, const std::string& v) { c.devices = to_uint(v); },
                 [](const C& c) -> std::optional<std::string> { return std::to_string(c.devices); }});
    f.push_back({"devices.sharding", [](C& c, const std::string& v) { c.sharding = to_choice(v, {"iid", "label_skew"}); },
                 [](const C& c) -> std::optional<std::string> { return c.sharding; }});

    add_choice(f, "train.loop", &C::train, &TrainSection::loop,
               {"pssgd", "fedavg", "compressed_ef", "signsgd", "slowmo", "decentralized", "sync_sparse", "hfl"});
    add_uint(f, "train.rounds", &C::train, &TrainSection::rounds);
    add_uint(f, "train.local_steps", &C::train, &TrainSection::local_steps);
    add_real(f, "train.lr", &C::train, &TrainSection::lr);
    add_choice(f, "train.lr_rule", &C::train, &TrainSection::lr_rule, {"constant", "step"});
    add_uint(f, "train.lr_step_every", &C::train, &TrainSection::lr_step_every);
    add_real(f, "train.lr_step_factor", &C::train, &TrainSection::lr_step_factor);
    add_uint(f, "train.batch_size", &C::train, &TrainSection::batch_size);
    add_choice(f, "train.optimizer", &C::train, &TrainSection::optimizer, {"plain", "momentum"});
    add_real(f, "train.momentum", &C::train, &TrainSection::momentum);
    add_real(f, "train.slowmo_alpha", &C::train, &TrainSection::slowmo_alpha);
    add_real(f, "train.slowmo_beta", &C::train, &TrainSection::slowmo_beta);
    add_bool(f, "train.weight_by_size", &C::train, &TrainSection::weight_by_size);
    add_uint(f, "train.sync_period", &C::train, &TrainSection::sync_period);
    add_real(f, "train.sync_phi", &C::train, &TrainSection::sync_phi);
    add_uint(f, "train.sync_tau_max", &C::train, &TrainSection::sync_tau_max);

    add_compressor(f, "uplink", &C::uplink);
    add_compressor(f, "downlink", &C::downlink);

    add_choice(f, "topology.graph", &C::topology, &TopologySection::graph,
               {"complete", "ring", "path", "star", "random", "uniform", "file"});
    add_real(f, "topology.edge_prob", &C::topology, &TopologySection::edge_prob);
    f.push_back({"topology.file", [](C& c, const std::string& v) { c.topology.file = v; },
                 [](const C& c) -> std::optional<std::string> { return c.topology.file; }});

    f.push_back({"hfl.clusters", [](C& c, const std::string& v) { c.hfl_clusters = to_uint(v); },
                 [](const C& c) -> std::optional<std::string> { return std::to_string(c.hfl_clusters); }});

    f.push_back({"channel.canned",
                 [](C& c, const std::string& v) {
                   if (v != "none" && v != "fig1" && v != "hfl")
                     throw BadValue("unknown canned configuration '" + v + "'");
                   c.channel.canned = v;
                 },
                 [](const C& c) -> std::optional<std::string> { return c.channel.canned; }});
    add_real(f, "channel.payload_bits", &C::channel, &ChannelSection::payload_bits);
    add_real(f, "channel.compute_s", &C::channel, &ChannelSection::compute_s);
    add_real(f, "channel.compute_jitter_s", &C::channel, &ChannelSection::compute_jitter_s);

    add_choice(f, "scheduler.policy", &C::scheduler, &SchedulerSection::policy,
               {"full", "random", "round_robin", "pf", "latency_min", "p2", "p4", "bc", "bn2", "bc_bn2", "bn2_c"});
    f.push_back({"scheduler.k", [](C& c, const std::string& v) { c.scheduler.k = to_uint(v); },
                 [](const C& c) -> std::optional<std::string> {
                   if (!c.scheduler.k) return std::nullopt;
                   return std::to_string(*c.scheduler.k);
                 }});
    f.push_back({"scheduler.k_c", [](C& c, const std::string& v) { c.scheduler.k_c = to_uint(v); },
                 [](const C& c) -> std::optional<std::string> {
                   if (!c.scheduler.k_c) return std::nullopt;
                   return std::to_string(*c.scheduler.k_c);
                 }});
    add_real(f, "scheduler.alpha_fair", &C::scheduler, &SchedulerSection::alpha_fair);
    add_real(f, "scheduler.r_min", &C::scheduler, &SchedulerSection::r_min);
    add_real(f, "scheduler.p_max", &C::scheduler, &SchedulerSection::p_max);
    add_real(f, "scheduler.t_max", &C::scheduler, &SchedulerSection::t_max);
    add_real(f, "scheduler.pf_factor", &C::scheduler, &SchedulerSection::pf_factor);

    f.push_back({"run.seed", [](C& c, const std::string& v) { c.seed = to_uint(v); },
                 [](const C& c) -> std::optional<std::string> { return std::to_string(c.seed); }});
    f.push_back({"run.out", [](C& c, const std::string& v) { c.out = v; },
                 [](const C& c) -> std::optional<std::string> { return c.out; }});
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

std::size_t param_dim(const ExperimentConfig& c) {
  if (c.task.model == "quadratic") return LossModel::quadratic(c.task.dim).param_dim();
  if (c.task.model == "logistic") return LossModel::logistic(c.task.dim + 1, c.task.classes).param_dim();
  return LossModel::perceptron(c.task.dim + 1, c.task.hidden, c.task.classes).param_dim();
}

bool needs_channel(const std::string& policy) {
  return policy == "pf" || policy == "latency_min" || policy == "p2" || policy == "p4" || policy == "bc" ||
         policy == "bc_bn2" || policy == "bn2_c";
}

// Cross-field checks; `line_of` maps keys to source lines (0 if absent).
void check_semantics(const ExperimentConfig& c, const std::function<std::size_t(const std::string&)>& line_of,
                     std::vector<ConfigIssue>& out) {
  auto issue = [&](const std::string& key, const std::string& msg) { out.push_back({line_of(key), key + ": " + msg}); };

  const auto& t = c.task;
  if (t.kind == "regression" && t.model != "quadratic") issue("task.model", "regression tasks use the quadratic model");
  if (t.kind == "classification" && t.model == "quadratic")
    issue("task.model", "classification tasks use logistic or perceptron");
  if (t.dim < 1) issue("task.dim", "must be at least 1");
  if (t.kind == "classification" && t.classes < 2) issue("task.classes", "must be at least 2");
  if (t.model == "perceptron" && t.hidden < 1) issue("task.hidden", "must be at least 1");
  if (t.noise < 0.0) issue("task.noise", "must be nonnegative");
  if (t.eval_fraction < 0.0 || t.eval_fraction >= 1.0) issue("task.eval_fraction", "must lie in [0, 1)");
  if (c.devices < 1) issue("devices.count", "must be at least 1");
  const double train_samples = static_cast<double>(t.samples) * (1.0 - t.eval_fraction);
  if (c.devices >= 1 && train_samples < static_cast<double>(c.devices))
    issue("task.samples", "too few training samples for one per device");

  try {
    to_train_config(c).validate();
  } catch (const ContractViolation& e) {
    issue("train", e.what());
  }

  const std::size_t d = t.dim >= 1 ? param_dim(c) : 1;
  auto check_comp = [&](const std::optional<CompressorSection>& s, const std::string& prefix) {
    if (!s) return;
    try {
      s->to_spec().validate(d);
    } catch (const ContractViolation& e) {
      issue(prefix + ".scheme", e.what());
    }
  };
  check_comp(c.uplink, "uplink");
  check_comp(c.downlink, "downlink");

  const auto& loop = c.train.loop;
  if (loop == "compressed_ef" && !c.uplink) issue("uplink.scheme", "required when train.loop = compressed_ef");
  if (loop != "compressed_ef" && (c.uplink || c.downlink))
    issue(c.uplink ? "uplink.scheme" : "downlink.scheme", "compression applies only to train.loop = compressed_ef");
  if (loop == "sync_sparse" && (c.train.sync_phi <= 0.0 || c.train.sync_phi > 1.0 ||
                                static_cast<double>(c.train.sync_tau_max) * c.train.sync_phi < 1.0))
    issue("train.sync_phi", "need 0 < phi <= 1 and tau_max * phi >= 1");
  if (loop == "decentralized" && c.topology.graph == "file" && c.topology.file.empty())
    issue("topology.file", "required when topology.graph = file");
  if (loop == "decentralized" && c.topology.graph == "random" && (c.topology.edge_prob <= 0.0 || c.topology.edge_prob > 1.0))
    issue("topology.edge_prob", "must lie in (0, 1]");
  if (loop == "hfl") {
    if (c.channel.canned != "hfl" && c.hfl_clusters == 0)
      issue("hfl.clusters", "required when train.loop = hfl without channel.canned = hfl");
    if (c.hfl_clusters > c.devices) issue("hfl.clusters", "cannot exceed devices.count");
    const std::size_t cells = c.hfl_clusters > 0 ? c.hfl_clusters : 7;
    if (c.channel.canned == "hfl" && cells > 7) issue("hfl.clusters", "the hfl layout has at most 7 cells");
    if (c.channel.canned == "hfl" && c.devices < cells) issue("devices.count", "fewer devices than hfl cells");
  }

  const auto& s = c.scheduler;
  const bool scheduled_loop = loop == "fedavg" || loop == "compressed_ef" || loop == "slowmo";
  if (s.policy != "full" && !scheduled_loop)
    issue("scheduler.policy", "device scheduling applies only to fedavg, compressed_ef and slowmo loops");
  const bool needs_k = s.policy != "full" && s.policy != "p2" && s.policy != "p4";
  if (needs_k && !s.k) issue("scheduler.k", "missing; required when scheduler.policy = " + s.policy);
  if (s.k && (*s.k < 1 || *s.k > c.devices)) issue("scheduler.k", "must lie in [1, devices.count]");
  if (s.policy == "bc_bn2") {
    if (!s.k_c)
      issue("scheduler.k_c", "missing; required when scheduler.policy = bc_bn2");
    else if (s.k && (*s.k_c < *s.k || *s.k_c > c.devices))
      issue("scheduler.k_c", "must lie in [scheduler.k, devices.count]");
  }
  if (needs_channel(s.policy) && c.channel.canned != "fig1")
    issue("channel.canned", "scheduler.policy = " + s.policy + " needs channel.canned = fig1");
  if (s.policy == "p2") {
    if (s.r_min <= 0.0) issue("scheduler.r_min", "must be positive for p2");
    if (s.p_max <= 0.0) issue("scheduler.p_max", "must be positive for p2");
    if (s.alpha_fair < 0.0) issue("scheduler.alpha_fair", "must be nonnegative");
  }
  if ((s.policy == "p4" || s.policy == "bn2_c") && s.t_max <= 0.0)
    issue("scheduler.t_max", "must be positive for " + s.policy);
  if (s.pf_factor <= 0.0 || s.pf_factor > 1.0) issue("scheduler.pf_factor", "must lie in (0, 1]");
  if (c.channel.payload_bits < 0.0) issue("channel.payload_bits", "must be nonnegative");
  if (c.channel.compute_s < 0.0 || c.channel.compute_jitter_s < 0.0)
    issue("channel.compute_s", "compute times must be nonnegative");
}

std::string section_of(const std::string& key) { return key.substr(0, key.find('.')); }

struct Parsed {
  ExperimentConfig cfg;
  std::vector<ConfigIssue> issues;
};

Parsed parse_all(const std::string& text) {
  Parsed p;
  std::map<std::string, std::size_t> lines;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t no = 0;
  while (std::getline(in, raw)) {
    ++no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        p.issues.push_back({no, "malformed section header '" + line + "'"});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      p.issues.push_back({no, "expected 'key = value', got '" + line + "'"});
      continue;
    }
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string key = section.empty() ? name : section + "." + name;
    if (name.empty()) {
      p.issues.push_back({no, "missing key before '='"});
      continue;
    }
    const Field* f = find_field(key);
    if (!f) {
      p.issues.push_back({no, "unknown key '" + key + "'"});
      continue;
    }
    if (lines.count(key)) {
      p.issues.push_back({no, "duplicate key '" + key + "' (first on line " + std::to_string(lines[key]) + ")"});
      continue;
    }
    lines[key] = no;
    try {
      f->set(p.cfg, value);
    } catch (const BadValue& e) {
      p.issues.push_back({no, key + ": " + e.what()});
    }
  }
  auto line_of = [&](const std::string& key) -> std::size_t {
    auto it = lines.find(key);
    if (it != lines.end()) return it->second;
    // Fall back to the first key of the same section.
    std::size_t best = 0;
    for (const auto& [k, l] : lines)
      if (section_of(k) == section_of(key) && (best == 0 || l < best)) best = l;
    return best;
  };
  check_semantics(p.cfg, line_of, p.issues);
  std::stable_sort(p.issues.begin(), p.issues.end(),
                   [](const ConfigIssue& a, const ConfigIssue& b) { return a.line < b.line; });
  return p;
}

std::string join_issues(const std::vector<ConfigIssue>& issues) { return format_issues(issues); }

}  // namespace

compression::CompressorSpec CompressorSection::to_spec() const {
  compression::CompressorSpec s;
  const auto sc = compression::scheme_from_name(scheme);
  COLEARN_REQUIRE(sc.has_value(), "unknown compressor scheme '" + scheme + "'");
  s.scheme = *sc;
  s.k = k;
  s.r = r;
  s.levels = levels;
  s.eps = eps;
  s.phi = phi;
  s.tau_max = tau_max;
  s.blocks = blocks;
  s.threshold = threshold;
  s.rescale = rescale;
  return s;
}

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<ConfigIssue> check_config(const std::string& text) { return parse_all(text).issues; }

ExperimentConfig parse_config(const std::string& text) {
  Parsed p = parse_all(text);
  if (!p.issues.empty()) throw ConfigError(std::move(p.issues));
  return p.cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string current;
  for (const auto& f : fields()) {
    const auto value = f.get(cfg);
    if (!value) continue;
    const std::string sec = section_of(f.key);
    if (sec != current) {
      if (!current.empty()) out << '\n';
      out << '[' << sec << "]\n";
      current = sec;
    }
    out << f.key.substr(sec.size() + 1) << " = " << *value << '\n';
  }
  return out.str();
}

std::string format_issues(const std::vector<ConfigIssue>& issues) {
  std::string s;
  for (const auto& i : issues) {
    s += i.line ? "line " + std::to_string(i.line) + ": " : std::string("config: ");
    s += i.message + "\n";
  }
  return s;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

training::TrainConfig to_train_config(const ExperimentConfig& cfg) {
  training::TrainConfig t;
  t.rounds = cfg.train.rounds;
  t.local_steps = cfg.train.local_steps;
  t.lr.eta0 = cfg.train.lr;
  t.lr.rule = cfg.train.lr_rule == "step" ? training::LrRule::step : training::LrRule::constant;
  t.lr.step_every = cfg.train.lr_step_every;
  t.lr.step_factor = cfg.train.lr_step_factor;
  t.batch_size = cfg.train.batch_size;
  t.optimizer = cfg.train.optimizer == "momentum" ? training::Optimizer::momentum : training::Optimizer::plain;
  t.momentum = cfg.train.momentum;
  t.slowmo_alpha = cfg.train.slowmo_alpha;
  t.slowmo_beta = cfg.train.slowmo_beta;
  t.weight_by_size = cfg.train.weight_by_size;
  t.sync_period = cfg.train.sync_period;
  t.seed = cfg.seed;
  if (cfg.uplink && compression::scheme_from_name(cfg.uplink->scheme)) t.uplink = cfg.uplink->to_spec();
  if (cfg.downlink && compression::scheme_from_name(cfg.downlink->scheme)) t.downlink = cfg.downlink->to_spec();
  return t;
}

}  // namespace colearn::harness
