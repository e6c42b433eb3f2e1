#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bspre/codegen.hpp"
#include "bspre/harness.hpp"
#include "bspre/rng.hpp"

namespace {

std::string read_stream(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string read_text(const std::string& path) {
  if (path == "-") return read_stream(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bspre::ConfigError("cannot read '" + path + "'");
  return read_stream(in);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::string s = read_text(path);
  return {s.begin(), s.end()};
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  if (path == "-") {
    std::cout.write(reinterpret_cast<const char*>(bytes.data()),
                    static_cast<std::streamsize>(bytes.size()));
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bspre::ConfigError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

bspre::FeatureVector parse_vector(const std::string& text) {
  bspre::FeatureVector v;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    v.push_back(static_cast<std::int16_t>(std::stol(tok)));
  }
  return v;
}

// Codelet files: binary when the first byte matches the format version and
// the size fits the fixed record layout, otherwise assembly text.
bspre::Codelet load_codelet(const std::string& path) {
  std::vector<std::uint8_t> bytes = read_bytes(path);
  if (bytes.size() >= 4 && bytes[0] == 1 && (bytes.size() - 4) % 6 == 0) {
    try {
      return bspre::from_binary(bytes);
    } catch (const bspre::InvalidCodelet&) {
    }
  }
  return bspre::assemble(std::string(bytes.begin(), bytes.end()));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bspre;
  CLI::App app{"binary-space-partitioning intrinsic-reward engine"};
  app.require_subcommand(1);

  // run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run a seeded engine experiment");
  std::string config_path, env_name, metrics_out, snapshot_out;
  std::uint64_t seed = 0, ticks = 0, cadence = 0;
  unsigned workers = 0;
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--env", env_name, "letters | pixels");
  run->add_option("--seed", seed, "engine seed");
  run->add_option("--ticks", ticks, "tick count");
  run->add_option("--cadence", cadence, "ticks per metrics sample");
  run->add_option("--metrics-out", metrics_out, "metrics file path");
  run->add_option("--snapshot-out", snapshot_out, "final snapshot path");
  run->add_option("--workers", workers, "execution-phase worker threads");

  // codelet ------------------------------------------------------------
  auto* codelet = app.add_subcommand("codelet", "codelet tooling");
  codelet->require_subcommand(1);

  auto* gen = codelet->add_subcommand("gen", "generate a random valid codelet");
  std::uint64_t gen_seed = 0;
  unsigned gen_arity = 1, gen_min = 4, gen_max = 16;
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--arity", gen_arity, "input slots");
  gen->add_option("--min-len", gen_min, "minimum instruction count");
  gen->add_option("--max-len", gen_max, "maximum instruction count");

  auto* exec = codelet->add_subcommand("exec", "execute a codelet on input vectors");
  std::string exec_path, exec_input;
  std::uint64_t exec_fuel = kDefaultFuel;
  exec->add_option("file", exec_path, "codelet file (.casm or binary), '-' for stdin")
      ->required();
  exec->add_option("--input", exec_input,
                   "input vectors, ';'-separated slots of comma-separated ints")
      ->required();
  exec->add_option("--fuel", exec_fuel, "step budget");

  auto* val = codelet->add_subcommand("validate", "report codelet violations");
  std::string val_path = "-";
  val->add_option("file", val_path, "codelet file, '-' for stdin");

  auto* asm_cmd = codelet->add_subcommand("asm", "assembly text to binary");
  std::string asm_in = "-", asm_out = "-";
  asm_cmd->add_option("file", asm_in, "assembly file, '-' for stdin");
  asm_cmd->add_option("-o,--out", asm_out, "binary output, '-' for stdout");

  auto* disasm = codelet->add_subcommand("disasm", "binary to assembly text");
  std::string disasm_in = "-";
  disasm->add_option("file", disasm_in, "binary codelet, '-' for stdin");

  // inspect ------------------------------------------------------------
  auto* inspect = app.add_subcommand("inspect", "summarize an engine snapshot");
  std::string inspect_path;
  inspect->add_option("snapshot", inspect_path, "snapshot file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      RunConfig cfg;
      try {
        if (!config_path.empty()) cfg = load_config_file(config_path);
        apply_env_overrides(cfg);
        if (!env_name.empty()) apply_config_kv(cfg, "env", env_name);
        if (run->count("--seed")) cfg.seed = seed;
        if (run->count("--ticks")) cfg.ticks = ticks;
        if (run->count("--cadence")) cfg.cadence = cadence;
        if (run->count("--workers")) cfg.workers = workers;
        if (!metrics_out.empty()) cfg.metrics_out = metrics_out;
        if (!snapshot_out.empty()) cfg.snapshot_out = snapshot_out;
        if (!run_config_ok(cfg)) throw ConfigError("invalid run configuration");
      } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
      }
      RunResult result = run_experiment(cfg);
      if (cfg.metrics_out.empty()) std::cout << result.metrics;
      return 0;
    }

    if (*gen) {
      GenParams p;
      p.arity = static_cast<std::uint16_t>(gen_arity);
      p.min_len = static_cast<std::uint16_t>(gen_min);
      p.max_len = static_cast<std::uint16_t>(gen_max);
      std::uint64_t rng = gen_seed;
      std::cout << disassemble(generate(p, rng));
      return 0;
    }
    if (*exec) {
      Codelet c = load_codelet(exec_path);
      std::vector<FeatureVector> inputs;
      std::istringstream slots(exec_input);
      std::string slot;
      while (std::getline(slots, slot, ';')) inputs.push_back(parse_vector(slot));
      if (inputs.empty()) inputs.push_back({});
      ExecOutcome o = execute(c, inputs, exec_fuel);
      switch (o.kind) {
        case OutcomeKind::Positive: {
          std::cout << "Positive [";
          for (std::size_t i = 0; i < o.output.size(); ++i)
            std::cout << (i ? "," : "") << o.output[i];
          std::cout << "] steps=" << o.steps_used << '\n';
          break;
        }
        case OutcomeKind::Negative:
          std::cout << "Negative steps=" << o.steps_used << '\n';
          break;
        case OutcomeKind::FuelExhausted:
          std::cout << "FuelExhausted steps=" << o.steps_used << '\n';
          break;
      }
      return 0;
    }
    if (*val) {
      Codelet c = load_codelet(val_path);
      std::vector<Violation> violations = validate(c);
      if (violations.empty()) {
        std::cout << "ok\n";
      } else {
        for (Violation v : violations) std::cout << violation_name(v) << '\n';
      }
      return 0;
    }
    if (*asm_cmd) {
      write_bytes(asm_out, to_binary(assemble(read_text(asm_in))));
      return 0;
    }
    if (*disasm) {
      std::cout << disassemble(from_binary(read_bytes(disasm_in)));
      return 0;
    }
    if (*inspect) {
      try {
        std::cout << inspect_snapshot(read_bytes(inspect_path));
      } catch (const CorruptSnapshot& e) {
        std::cerr << "CorruptSnapshot: " << e.what() << '\n';
        return 1;
      } catch (const VersionMismatch& e) {
        std::cerr << "VersionMismatch: " << e.what() << '\n';
        return 1;
      }
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return *run ? 2 : 1;
  }
  return 0;
}
