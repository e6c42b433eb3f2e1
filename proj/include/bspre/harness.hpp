#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bspre/env.hpp"
#include "bspre/network.hpp"

namespace bspre {

struct RunConfig {
  std::string env_name = "letters";  // "letters" | "pixels"
  std::uint64_t seed = 42;
  std::uint64_t ticks = 1000;
  std::uint64_t cadence = 100;  // ticks per metrics sample
  unsigned workers = 1;
  std::string metrics_out;
  std::string snapshot_out;
  EngineParams params;
  LetterStreamConfig letters;
  PixelStreamConfig pixels;
};

bool run_config_ok(const RunConfig& cfg);

// key=value application shared by config files, BSPRE_* environment
// variables, and CLI flags. Throws ConfigError on unknown keys / bad values.
void apply_config_kv(RunConfig& cfg, const std::string& key, const std::string& value);

// Plain-text config: one key=value per line, '#' comments.
RunConfig load_config_file(const std::string& path);

// Applies any BSPRE_<KEY> environment variables over cfg.
void apply_env_overrides(RunConfig& cfg);

// Canonical key=value listing, used for the metrics provenance header.
std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& cfg);

struct RunResult {
  std::string metrics;                 // full metrics file contents
  std::vector<std::uint8_t> snapshot;  // final engine snapshot
  std::uint64_t total_executions = 0;
  std::vector<double> pruned_p;     // window p of dropped concepts (where known)
  std::vector<double> surviving_p;  // final window p of surviving codelet concepts
};

// Runs the configured experiment end to end. (config, seed) fully determines
// every emitted byte.
RunResult run_experiment(const RunConfig& cfg);

// Human-readable network summary, stable id ordering.
std::string inspect_snapshot(const std::vector<std::uint8_t>& bytes);

// Deterministic decimal rendering used everywhere output bytes matter.
std::string format_double(double v);

}  // namespace bspre
