#include "bspre/harness.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bspre/rng.hpp"

namespace bspre {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool run_config_ok(const RunConfig& cfg) {
  if (cfg.ticks < 1 || cfg.cadence < 1 || cfg.workers < 1) return false;
  if (cfg.env_name != "letters" && cfg.env_name != "pixels") return false;
  return engine_params_ok(cfg.params);
}

namespace {

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos;
    unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("bad integer for " + key + ": '" + value + "'");
  }
}

double parse_f64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError("bad number for " + key + ": '" + value + "'");
  }
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

}  // namespace

void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value) {
  EngineParams& p = cfg.params;
  if (key == "env") {
    if (value != "letters" && value != "pixels")
      throw ConfigError("env must be 'letters' or 'pixels'");
    cfg.env_name = value;
  } else if (key == "seed") {
    cfg.seed = parse_u64(key, value);
  } else if (key == "ticks") {
    cfg.ticks = parse_u64(key, value);
  } else if (key == "cadence") {
    cfg.cadence = parse_u64(key, value);
  } else if (key == "workers") {
    cfg.workers = static_cast<unsigned>(parse_u64(key, value));
  } else if (key == "metrics_out") {
    cfg.metrics_out = value;
  } else if (key == "snapshot_out") {
    cfg.snapshot_out = value;
  } else if (key == "alpha") {
    p.alpha = parse_f64(key, value);
  } else if (key == "gamma") {
    p.gamma = parse_f64(key, value);
  } else if (key == "q_const") {
    p.q_const = parse_f64(key, value);
  } else if (key == "q_init") {
    p.q_init = parse_f64(key, value);
  } else if (key == "max_actions_per_tail") {
    p.max_actions_per_tail = static_cast<std::uint32_t>(parse_u64(key, value));
  } else if (key == "fuel") {
    p.fuel = parse_u64(key, value);
  } else if (key == "prune_threshold") {
    p.prune_threshold = parse_f64(key, value);
  } else if (key == "prune_patience") {
    p.prune_patience = parse_u64(key, value);
  } else if (key == "td_rule") {
    if (value == "max")
      p.td_rule = TdRule::Max;
    else if (value == "mean")
      p.td_rule = TdRule::Mean;
    else
      throw ConfigError("td_rule must be 'max' or 'mean'");
  } else if (key == "explore") {
    if (value == "true" || value == "1")
      p.explore = true;
    else if (value == "false" || value == "0")
      p.explore = false;
    else
      throw ConfigError("explore must be true/false");
  } else if (key == "window_capacity") {
    p.window_capacity = static_cast<std::uint32_t>(parse_u64(key, value));
  } else if (key == "timing_decay") {
    p.timing_decay = parse_f64(key, value);
  } else if (key == "gen_min_len") {
    p.gen_min_len = static_cast<std::uint16_t>(parse_u64(key, value));
  } else if (key == "gen_max_len") {
    p.gen_max_len = static_cast<std::uint16_t>(parse_u64(key, value));
  } else if (key == "pixel_mode") {
    if (value == "uniform")
      cfg.pixels.mode = PixelStreamConfig::Mode::UniformRandom;
    else
      throw ConfigError("pixel_mode must be 'uniform' (scripts are API-only)");
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void apply_env_overrides(RunConfig& cfg) {
  static const char* kKeys[] = {
      "env", "seed", "ticks", "cadence", "workers", "metrics_out", "snapshot_out",
      "alpha", "gamma", "q_const", "q_init", "max_actions_per_tail", "fuel",
      "prune_threshold", "prune_patience", "td_rule", "explore", "window_capacity",
      "timing_decay", "gen_min_len", "gen_max_len", "pixel_mode"};
  for (const char* key : kKeys) {
    std::string var = "BSPRE_";
    for (const char* c = key; *c; ++c)
      var += static_cast<char>(std::toupper(static_cast<unsigned char>(*c)));
    if (const char* value = std::getenv(var.c_str())) apply_config_kv(cfg, key, value);
  }
}

std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& cfg) {
  const EngineParams& p = cfg.params;
  return {
      {"env", cfg.env_name},
      {"seed", std::to_string(cfg.seed)},
      {"ticks", std::to_string(cfg.ticks)},
      {"cadence", std::to_string(cfg.cadence)},
      {"workers", std::to_string(cfg.workers)},
      {"alpha", format_double(p.alpha)},
      {"gamma", format_double(p.gamma)},
      {"q_const", format_double(p.q_const)},
      {"q_init", format_double(p.q_init)},
      {"max_actions_per_tail", std::to_string(p.max_actions_per_tail)},
      {"fuel", std::to_string(p.fuel)},
      {"prune_threshold", format_double(p.prune_threshold)},
      {"prune_patience", std::to_string(p.prune_patience)},
      {"td_rule", p.td_rule == TdRule::Max ? "max" : "mean"},
      {"explore", p.explore ? "true" : "false"},
      {"window_capacity", std::to_string(p.window_capacity)},
      {"timing_decay", format_double(p.timing_decay)},
      {"gen_min_len", std::to_string(p.gen_min_len)},
      {"gen_max_len", std::to_string(p.gen_max_len)},
  };
}

namespace {

// Per-edge in-degree map computed once per sample.
std::size_t in_degree(const Depository& dep, ConceptId id) {
  return dep.incoming_count(id);
}

constexpr std::size_t kMetricsColumns = 22;

enum Col : std::size_t {
  kRow, kTick, kId, kLevel, kP, kIntrinsic, kEffective, kAvgSteps, kInDeg,
  kOutDeg, kTail, kHead, kSlot, kQ, kConcepts, kActions, kExecutions,
  kExplorations, kPrunes, kRemoved, kDevSurviving, kDevPruned
};

void emit_row(std::ostringstream& out, const std::array<std::string, kMetricsColumns>& row) {
  for (std::size_t i = 0; i < kMetricsColumns; ++i) {
    if (i) out << ',';
    out << row[i];
  }
  out << '\n';
}

void emit_sample(std::ostringstream& out, const Depository& dep, std::uint64_t tick,
                 std::uint64_t executions, std::uint64_t explorations,
                 std::uint64_t prunes, std::uint64_t removed,
                 const std::vector<double>& removed_p) {
  const double argmax = reward_argmax();
  const std::string tick_s = std::to_string(tick);

  double dev_surviving = 0.0;
  std::size_t n_surviving = 0;
  for (const auto& [id, c] : dep.concepts()) {
    if (c.kind != ConceptKind::CodeletNode || c.window.empty()) continue;
    dev_surviving += std::fabs(c.window.probability() - argmax);
    ++n_surviving;
  }
  double dev_pruned = 0.0;
  std::size_t n_pruned = 0;
  for (double p : removed_p) {
    if (std::isnan(p)) continue;
    dev_pruned += std::fabs(p - argmax);
    ++n_pruned;
  }

  for (const auto& [id, c] : dep.concepts()) {
    std::array<std::string, kMetricsColumns> row;
    row[kRow] = "concept";
    row[kTick] = tick_s;
    row[kId] = std::to_string(id);
    row[kLevel] = std::to_string(c.level);
    if (!c.window.empty()) {
      const double p = c.window.probability();
      row[kP] = format_double(p);
      row[kIntrinsic] = format_double(intrinsic_reward(p));
      if (c.timing.any())
        row[kEffective] = format_double(effective_reward(intrinsic_reward(p), c.timing));
    }
    if (c.timing.any()) row[kAvgSteps] = format_double(c.timing.average());
    row[kInDeg] = std::to_string(in_degree(dep, id));
    row[kOutDeg] = std::to_string(dep.actions_of(id).size());
    emit_row(out, row);
  }
  for (const Action* a : dep.all_actions()) {
    std::array<std::string, kMetricsColumns> row;
    row[kRow] = "edge";
    row[kTick] = tick_s;
    row[kTail] = std::to_string(a->tail);
    row[kHead] = std::to_string(a->head);
    row[kSlot] = std::to_string(a->slot);
    row[kQ] = format_double(a->q);
    emit_row(out, row);
  }
  std::array<std::string, kMetricsColumns> row;
  row[kRow] = "agg";
  row[kTick] = tick_s;
  row[kConcepts] = std::to_string(dep.concepts().size());
  row[kActions] = std::to_string(dep.action_count());
  row[kExecutions] = std::to_string(executions);
  row[kExplorations] = std::to_string(explorations);
  row[kPrunes] = std::to_string(prunes);
  row[kRemoved] = std::to_string(removed);
  if (n_surviving > 0) row[kDevSurviving] = format_double(dev_surviving / n_surviving);
  if (n_pruned > 0) row[kDevPruned] = format_double(dev_pruned / n_pruned);
  emit_row(out, row);
}

}  // namespace

RunResult run_experiment(const RunConfig& cfg) {
  if (!run_config_ok(cfg)) throw ConfigError("invalid run configuration");

  Depository dep(cfg.params, cfg.seed);
  dep.add_sensory(0);
  std::uint64_t env_rng = cfg.seed ^ 0xda3e39cb94b95bdbULL;

  std::ostringstream metrics;
  metrics << "# bspre metrics schema=1\n";
  for (const auto& [k, v] : config_items(cfg)) metrics << "# " << k << '=' << v << '\n';
  metrics << "row,tick,id,level,p,intrinsic,effective,avg_steps,in_deg,out_deg,"
             "tail,head,slot,q,concepts,actions,executions,explorations,prunes,"
             "removed,dev_surviving,dev_pruned\n";

  RunResult result;
  std::uint64_t executions = 0, explorations = 0, prunes = 0, removed = 0;
  std::vector<double> removed_p_window;

  for (std::uint64_t t = 1; t <= cfg.ticks; ++t) {
    std::vector<FeatureVector> frame(1);
    if (cfg.env_name == "letters")
      frame[0] = letter_frame(cfg.letters, env_rng).second;
    else
      frame[0] = pixel_frame(cfg.pixels, env_rng, t - 1);

    TickReport rep = dep.tick(frame, cfg.workers);
    executions += rep.executions;
    explorations += rep.explorations;
    prunes += rep.actions_pruned;
    removed += rep.concepts_removed.size();
    result.total_executions += rep.executions;
    for (const auto& [id, p] : rep.concepts_removed) {
      removed_p_window.push_back(p);
      if (!std::isnan(p)) result.pruned_p.push_back(p);
    }

    if (t % cfg.cadence == 0) {
      emit_sample(metrics, dep, t, executions, explorations, prunes, removed,
                  removed_p_window);
      executions = explorations = prunes = removed = 0;
      removed_p_window.clear();
    }
  }

  for (const auto& [id, c] : dep.concepts())
    if (c.kind == ConceptKind::CodeletNode && !c.window.empty())
      result.surviving_p.push_back(c.window.probability());

  result.metrics = metrics.str();
  result.snapshot = dep.snapshot();

  if (!cfg.metrics_out.empty()) {
    std::ofstream out(cfg.metrics_out, std::ios::binary);
    if (!out) throw ConfigError("cannot write metrics to '" + cfg.metrics_out + "'");
    out << result.metrics;
  }
  if (!cfg.snapshot_out.empty()) {
    std::ofstream out(cfg.snapshot_out, std::ios::binary);
    if (!out) throw ConfigError("cannot write snapshot to '" + cfg.snapshot_out + "'");
    out.write(reinterpret_cast<const char*>(result.snapshot.data()),
              static_cast<std::streamsize>(result.snapshot.size()));
  }
  return result;
}

std::string inspect_snapshot(const std::vector<std::uint8_t>& bytes) {
  Depository dep = Depository::restore(bytes);
  std::ostringstream out;
  out << "tick " << dep.current_tick() << ", " << dep.concepts().size()
      << " concepts, " << dep.action_count() << " actions\n";
  for (const auto& [id, c] : dep.concepts()) {
    out << "concept " << id << " level=" << c.level << " kind=";
    switch (c.kind) {
      case ConceptKind::SensoryAtom: out << "sensory(ch=" << c.channel << ")"; break;
      case ConceptKind::CodeletNode:
        out << "codelet(" << c.codelet.instructions.size() << " ins)";
        break;
      case ConceptKind::ActuatorAtom: out << "actuator"; break;
    }
    if (!c.window.empty())
      out << " p=" << format_double(c.window.probability()) << " (" << c.window.positives()
          << '/' << c.window.size() << ')';
    if (c.timing.any()) out << " avg_steps=" << format_double(c.timing.average());
    out << '\n';
    for (const Action& a : dep.actions_of(id))
      out << "  -> " << a.head << " slot=" << a.slot << " q=" << format_double(a.q)
          << '\n';
  }
  return out.str();
}

}  // namespace bspre
