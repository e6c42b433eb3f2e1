#include "bspre/codegen.hpp"

#include "bspre/rng.hpp"
#include "doctest.h"

using namespace bspre;

namespace {

Codelet threshold_codelet(std::int16_t limit) {
  Codelet c = assemble(
      "MOV A, var1[0]\n"
      "CMP A, #" + std::to_string(limit) + "\n"
      "JLE 5\n"
      "APPEND var1[0]\n"
      "RET\n"
      "EXIT\n");
  REQUIRE(validate(c).empty());
  return c;
}

Codelet identity_valid() {
  Codelet c = assemble(
      "MOV A, #0\n"
      "JNZ 4\n"
      "APPEND var1[0]\n"
      "RET\n"
      "EXIT\n");
  REQUIRE(validate(c).empty());
  return c;
}

Codelet always_exit() {
  Codelet c = assemble(
      "MOV A, #1\n"
      "JNZ 4\n"
      "RET\n"
      "NOP\n"
      "EXIT\n");
  REQUIRE(validate(c).empty());
  return c;
}

// Run a pair the long way: first, then second on first's output.
ExecOutcome two_stage(const Codelet& a, const Codelet& b, const FeatureVector& in,
                      std::uint64_t fuel) {
  ExecOutcome first = execute(a, {in}, fuel);
  if (first.kind != OutcomeKind::Positive) return first;
  ExecOutcome second = execute(b, {first.output}, fuel);
  second.steps_used += first.steps_used;
  return second;
}

}  // namespace

TEST_CASE("generated codelets always validate") {
  GenParams params;
  CHECK(gen_params_ok(params));
  std::uint64_t rng = 1;
  Codelet first = generate(params, rng);
  CHECK(validate(first).empty());

  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    std::uint64_t state = seed;
    Codelet c = generate(params, state);
    REQUIRE(validate(c).empty());
    REQUIRE(c.instructions.size() >= params.min_len);
    REQUIRE(c.instructions.size() <= params.max_len);
    REQUIRE(c.arity == params.arity);
  }
}

TEST_CASE("generation is deterministic in (params, rng_state)") {
  GenParams params;
  for (std::uint64_t seed : {0ull, 7ull, 42ull, 0xdeadbeefull}) {
    std::uint64_t a = seed, b = seed;
    CHECK(generate(params, a) == generate(params, b));
    CHECK(a == b);
  }
}

TEST_CASE("pinned length collapses to the minimal template shape") {
  GenParams params;
  params.min_len = params.max_len = 4;
  std::uint64_t rng = 5;
  for (int i = 0; i < 100; ++i) {
    Codelet c = generate(params, rng);
    REQUIRE(c.instructions.size() == 4);
    CHECK(validate(c).empty());
    bool has_ret = false, has_exit = false, has_cond = false;
    for (const Instruction& ins : c.instructions) {
      const auto& d = descriptor(ins.op);
      has_ret |= ins.op == Opcode::Ret;
      has_exit |= ins.op == Opcode::Exit;
      has_cond |= d.conditional_jump;
    }
    CHECK(has_ret);
    CHECK(has_exit);
    CHECK(has_cond);
  }
}

TEST_CASE("a seeded corpus partitions its inputs both ways") {
  GenParams params;
  std::uint64_t rng = 7;
  int both = 0;
  const int corpus = 200;
  for (int i = 0; i < corpus; ++i) {
    Codelet c = generate(params, rng);
    std::uint64_t input_rng = 0x9e3779b97f4a7c15ull + i;
    bool saw_pos = false, saw_neg = false;
    for (int k = 0; k < 100; ++k) {
      FeatureVector in = {static_cast<std::int16_t>(rng_next(input_rng) & 0xffff)};
      ExecOutcome o = execute(c, {in}, 512);
      saw_pos |= o.kind == OutcomeKind::Positive;
      saw_neg |= o.kind != OutcomeKind::Positive;
    }
    both += saw_pos && saw_neg;
  }
  CHECK(both >= corpus / 10);
}

TEST_CASE("identity composed with identity is identity") {
  Codelet ident = identity_valid();
  Codelet pair = concatenate(ident, ident);
  CHECK(validate(pair).empty());
  std::uint64_t rng = 1000;
  for (int i = 0; i < 1000; ++i) {
    FeatureVector in = {static_cast<std::int16_t>(rng_next(rng) & 0xffff)};
    ExecOutcome o = execute(pair, {in}, 512);
    REQUIRE(o.kind == OutcomeKind::Positive);
    CHECK(o.output == in);
  }
}

TEST_CASE("chained thresholds pass exactly the intersection") {
  Codelet pair = concatenate(threshold_codelet(3), threshold_codelet(5));
  CHECK(validate(pair).empty());
  for (std::int16_t v = 0; v <= 15; ++v) {
    ExecOutcome o = execute(pair, {{v}}, 512);
    if (v >= 6) {
      CHECK(o.kind == OutcomeKind::Positive);
      CHECK(o.output == FeatureVector{v});
    } else {
      CHECK(o.kind == OutcomeKind::Negative);
    }
  }
}

TEST_CASE("composing with always-EXIT rejects everything") {
  Codelet pair = concatenate(identity_valid(), always_exit());
  std::uint64_t rng = 2;
  for (int i = 0; i < 200; ++i) {
    FeatureVector in = {static_cast<std::int16_t>(rng_next(rng) & 0xffff)};
    CHECK(execute(pair, {in}, 512).kind == OutcomeKind::Negative);
  }
}

TEST_CASE("concatenation matches two-stage execution on a generated corpus") {
  GenParams params;
  params.arity = 1;
  std::uint64_t rng = 99;
  int pairs_checked = 0;
  while (pairs_checked < 500) {
    Codelet a = generate(params, rng);
    Codelet b = generate(params, rng);
    Codelet joined = concatenate(a, b);
    REQUIRE(validate(joined).empty());
    ++pairs_checked;
    std::uint64_t input_rng = rng_next(rng);
    for (int k = 0; k < 100; ++k) {
      FeatureVector in = {static_cast<std::int16_t>(rng_next(input_rng) & 0xffff)};
      ExecOutcome split = two_stage(a, b, in, 4096);
      ExecOutcome whole = execute(joined, {in}, 4096);
      if (split.kind == OutcomeKind::FuelExhausted ||
          whole.kind == OutcomeKind::FuelExhausted)
        continue;
      CHECK(whole.kind == split.kind);
      if (whole.kind == OutcomeKind::Positive) CHECK(whole.output == split.output);
      CHECK(whole.steps_used <= split.steps_used + kConcatOverheadSteps);
    }
  }
}

TEST_CASE("concatenation rejects bad operands") {
  Codelet two_input = assemble(
      ".arity 2\n"
      "MOV A, var1[0]\n"
      "JZ 4\n"
      "APPEND var2[0]\n"
      "RET\n"
      "EXIT\n");
  REQUIRE(validate(two_input).empty());
  CHECK_THROWS_AS(concatenate(identity_valid(), two_input), ArityMismatch);
  CHECK_NOTHROW(concatenate(two_input, identity_valid()));
}
