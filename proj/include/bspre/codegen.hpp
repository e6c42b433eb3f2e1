#pragma once

#include <cstdint>

#include "bspre/vm.hpp"

namespace bspre {

// Worst-case extra steps a spliced pair spends over running its two stages
// separately (the FLIP between the stages).
inline constexpr std::uint64_t kConcatOverheadSteps = 1;

// Relative weights over the instruction families the generator draws filler
// from. Jumps and terminals are placed by the template, never drawn.
struct GenWeights {
  double load = 4.0;
  double move = 1.0;
  double alu = 4.0;
  double append = 2.0;
  double len = 0.5;
  double nop = 0.25;
};

struct GenParams {
  std::uint16_t min_len = 4;
  std::uint16_t max_len = 16;
  std::uint16_t arity = 1;
  GenWeights weights;
};

bool gen_params_ok(const GenParams& p);

// Random search in program space. Always returns a codelet that passes
// validate(); deterministic given (params, rng_state). Shape: filler prefix,
// one conditional jump, a RET branch and an EXIT branch with random filler.
Codelet generate(const GenParams& params, std::uint64_t& rng_state);

// Splices `second` after `first` so the pair runs as one codelet: first's RET
// paths jump to a FLIP that turns first's output into second's slot-1 input.
// second must have arity 1. Throws ArityMismatch / InvalidCodelet.
Codelet concatenate(const Codelet& first, const Codelet& second);

}  // namespace bspre
