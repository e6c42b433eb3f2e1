#include "bspre/vm.hpp"

#include <set>

#include "bspre/rng.hpp"
#include "doctest.h"

using namespace bspre;

namespace {

Codelet asm_ok(const std::string& text) {
  Codelet c = assemble(text);
  REQUIRE(validate(c).empty());
  return c;
}

const char* kIdentity =
    "APPEND var1[0]\n"
    "RET\n";

// if var1[0] > 5: pass the value through, else negative
const char* kThreshold5 =
    "MOV A, var1[0]\n"
    "CMP A, #5\n"
    "JLE 5\n"
    "APPEND var1[0]\n"
    "RET\n"
    "EXIT\n";

}  // namespace

TEST_CASE("instruction set has exactly 65 opcodes with the evidenced mnemonics") {
  const auto& isa = instruction_set();
  CHECK(isa.size() == 65);
  std::set<std::string_view> mnemonics;
  for (const auto& d : isa) mnemonics.insert(d.mnemonic);
  for (const char* m : {"MOV", "ADD", "APPEND", "JZ", "RET", "EXIT"})
    CHECK(mnemonics.count(m));
  // every opcode indexes its own descriptor
  for (std::size_t i = 0; i < isa.size(); ++i)
    CHECK(static_cast<std::size_t>(isa[i].op) == i);
}

TEST_CASE("identity codelet returns its input") {
  // Executable (structurally sound) but not a valid concept codelet: no EXIT
  // and no separating branch.
  Codelet c = assemble(kIdentity);
  CHECK(!validate(c).empty());
  ExecOutcome ident = execute(c, {{7}}, 100);
  CHECK(ident.kind == OutcomeKind::Positive);
  CHECK(ident.output == FeatureVector{7});
  CHECK(ident.steps_used == 2);

  Codelet full = asm_ok(
      "MOV A, var1[0]\n"
      "JZ 4\n"
      "APPEND var1[0]\n"
      "RET\n"
      "EXIT\n");
  ExecOutcome o = execute(full, {{7}}, 100);
  CHECK(o.kind == OutcomeKind::Positive);
  CHECK(o.output == FeatureVector{7});
  CHECK(o.steps_used == 4);
}

TEST_CASE("threshold codelet partitions at 5") {
  Codelet c = asm_ok(kThreshold5);
  ExecOutcome lo = execute(c, {{3}}, 100);
  CHECK(lo.kind == OutcomeKind::Negative);
  ExecOutcome hi = execute(c, {{9}}, 100);
  CHECK(hi.kind == OutcomeKind::Positive);
  CHECK(hi.output == FeatureVector{9});
  ExecOutcome edge = execute(c, {{5}}, 100);
  CHECK(edge.kind == OutcomeKind::Negative);
}

TEST_CASE("non-halting loop exhausts fuel") {
  // the NOP/JNZ pair spins forever on a nonzero input
  Codelet looper = asm_ok(
      "MOV A, var1[0]\n"
      "JZ 6\n"
      "NOP\n"
      "JNZ 2\n"
      "RET\n"
      "NOP\n"
      "EXIT\n");
  ExecOutcome o = execute(looper, {{1}}, 100);
  CHECK(o.kind == OutcomeKind::FuelExhausted);
  CHECK(o.steps_used == 100);

  // raw unconditional self-jump, run without the validation gate by being
  // part of a valid shape that never reaches it... simplest honest check:
  // the fuel rule caps any codelet at the budget.
  ExecOutcome tight = execute(looper, {{1}}, 7);
  CHECK(tight.kind == OutcomeKind::FuelExhausted);
  CHECK(tight.steps_used == 7);
}

TEST_CASE("arithmetic wraps two's-complement 16-bit") {
  Codelet c = asm_ok(
      "MOV A, #32767\n"
      "ADD A, #1\n"
      "APPEND A\n"
      "JZ 6\n"
      "APPEND A\n"
      "RET\n"
      "EXIT\n");
  ExecOutcome o = execute(c, {{}}, 100);
  REQUIRE(o.kind == OutcomeKind::Positive);
  CHECK(o.output[0] == -32768);
}

TEST_CASE("division and modulo by zero yield 0 with Z set") {
  Codelet c = asm_ok(
      "MOV A, #17\n"
      "MOV B, #0\n"
      "DIV A, B\n"
      "JZ 5\n"  // Z set by the zero result
      "EXIT\n"
      "APPEND A\n"
      "RET\n"
      "EXIT\n");
  ExecOutcome o = execute(c, {{}}, 100);
  REQUIRE(o.kind == OutcomeKind::Positive);
  CHECK(o.output == FeatureVector{0});
}

TEST_CASE("out-of-range input read yields 0") {
  Codelet c = asm_ok(
      "MOV A, var1[63]\n"
      "JZ 4\n"
      "EXIT\n"
      "NOP\n"
      "RET\n");
  ExecOutcome o = execute(c, {{1, 2}}, 100);
  CHECK(o.kind == OutcomeKind::Positive);
}

TEST_CASE("append past the output ceiling terminates negatively") {
  // appends 1 forever (APPEND keeps the flags nonzero, JNZ loops back)
  Codelet bounded = asm_ok(
      "MOV A, var1[0]\n"
      "JZ 6\n"
      "APPEND A\n"
      "JNZ 2\n"
      "RET\n"
      "NOP\n"
      "EXIT\n");
  ExecOutcome o = execute(bounded, {{1}}, 10000);
  CHECK(o.kind == OutcomeKind::Negative);
  CHECK(o.steps_used < 10000);
}

TEST_CASE("execute is deterministic and fuel-monotone") {
  std::uint64_t rng = 99;
  Codelet c = asm_ok(kThreshold5);
  for (int i = 0; i < 50; ++i) {
    FeatureVector input = {static_cast<std::int16_t>(rng_next(rng) & 0xffff)};
    ExecOutcome a = execute(c, {input}, 512);
    ExecOutcome b = execute(c, {input}, 512);
    CHECK(a == b);
    if (a.kind != OutcomeKind::FuelExhausted) {
      ExecOutcome wide = execute(c, {input}, a.steps_used + 100);
      CHECK(a == wide);
      ExecOutcome exact = execute(c, {input}, a.steps_used);
      CHECK(a == exact);
    }
  }
}

TEST_CASE("execute rejects bad preconditions") {
  Codelet c = asm_ok(kThreshold5);
  CHECK_THROWS_AS(execute(c, {}, 100), ArityMismatch);
  CHECK_THROWS_AS(execute(c, {{1}, {2}}, 100), ArityMismatch);
  Codelet broken = c;
  broken.instructions.push_back({Opcode::Jmp, 999});
  CHECK_THROWS_AS(execute(broken, {{1}}, 100), InvalidCodelet);
  CHECK_THROWS_AS(execute(c, {{1}}, 0), DomainError);
}

TEST_CASE("validate reports precise violations") {
  SUBCASE("canonical branch-separated codelet validates") {
    CHECK(validate(assemble(kThreshold5)).empty());
  }
  SUBCASE("RET only") {
    Codelet c = assemble("MOV A, var1[0]\nJZ 2\nRET\n");
    auto v = validate(c);
    CHECK(std::find(v.begin(), v.end(), Violation::MissingExit) != v.end());
  }
  SUBCASE("EXIT only") {
    Codelet c = assemble("MOV A, var1[0]\nJZ 2\nEXIT\n");
    auto v = validate(c);
    CHECK(std::find(v.begin(), v.end(), Violation::MissingRet) != v.end());
  }
  SUBCASE("straight line RET then EXIT lacks a separating branch") {
    Codelet c = assemble("RET\nEXIT\n");
    auto v = validate(c);
    CHECK(std::find(v.begin(), v.end(), Violation::NoSeparatingBranch) != v.end());
  }
  SUBCASE("jump out of range") {
    Codelet c;
    c.arity = 1;
    c.instructions = {{Opcode::Jz, 99}, {Opcode::Ret}, {Opcode::Exit}};
    auto v = validate(c);
    CHECK(std::find(v.begin(), v.end(), Violation::BadJumpTarget) != v.end());
  }
  SUBCASE("slot out of arity range") {
    Codelet c;
    c.arity = 1;
    c.instructions = {
        {Opcode::MovASlotK, 3, 0}, {Opcode::Jz, 3}, {Opcode::Ret}, {Opcode::Exit}};
    auto v = validate(c);
    CHECK(std::find(v.begin(), v.end(), Violation::BadOperands) != v.end());
  }
}

TEST_CASE("assembly parse errors carry the line number") {
  try {
    assemble("MOV A, var1[0]\nBOGUS A\nRET\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("every opcode round-trips through text and binary") {
  // one instruction per opcode, with nontrivial operands where applicable
  Codelet c;
  c.arity = 3;
  for (std::size_t i = 0; i < kOpcodeCount; ++i) {
    Instruction ins{static_cast<Opcode>(i), 0, 0};
    const auto& d = instruction_set()[i];
    if (d.operands[0] == OperandKind::Slot) ins.a = 2;
    if (d.operands[0] == OperandKind::Imm)
      ins.a = static_cast<std::uint16_t>(static_cast<std::int16_t>(-123));
    if (d.operands[0] == OperandKind::Target) ins.a = 7;
    if (d.operands[1] == OperandKind::Elem) ins.b = 5;
    c.instructions.push_back(ins);
  }
  // text round trip (codelet may be invalid; asm/disasm do not validate)
  // split into chunks because the codelet length cap is 64
  Codelet first, second;
  first.arity = second.arity = 3;
  first.instructions.assign(c.instructions.begin(), c.instructions.begin() + 33);
  second.instructions.assign(c.instructions.begin() + 33, c.instructions.end());
  for (const Codelet* part : {&first, &second}) {
    Codelet again = assemble(disassemble(*part));
    CHECK(again == *part);
    Codelet bin = from_binary(to_binary(*part));
    CHECK(bin == *part);
  }
}

TEST_CASE("binary codelet rejects corrupt input") {
  Codelet c = assemble(kThreshold5);
  std::vector<std::uint8_t> bin = to_binary(c);
  SUBCASE("truncated") {
    bin.pop_back();
    CHECK_THROWS_AS(from_binary(bin), InvalidCodelet);
  }
  SUBCASE("wrong version") {
    bin[0] = 9;
    CHECK_THROWS_AS(from_binary(bin), InvalidCodelet);
  }
  SUBCASE("bad opcode") {
    bin[4] = 0xff;
    bin[5] = 0xff;
    CHECK_THROWS_AS(from_binary(bin), InvalidCodelet);
  }
}

TEST_CASE("positive outputs always satisfy vector bounds") {
  std::uint64_t rng = 4242;
  Codelet c = asm_ok(
      "MOV A, var1[0]\n"
      "JZ 6\n"
      "APPEND A\n"
      "DEC A\n"
      "JNZ 2\n"
      "RET\n"
      "EXIT\n");
  for (int i = 0; i < 200; ++i) {
    FeatureVector in = {static_cast<std::int16_t>(rng_below(rng, 200))};
    ExecOutcome o = execute(c, {in}, 4096);
    if (o.kind == OutcomeKind::Positive) CHECK(feature_vector_ok(o.output));
  }
}
