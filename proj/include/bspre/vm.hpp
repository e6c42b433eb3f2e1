#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bspre/errors.hpp"

namespace bspre {

inline constexpr std::size_t kMaxVecLen = 64;
inline constexpr std::size_t kMaxCodeletLen = 64;
inline constexpr int kDefaultFuel = 512;

// Uniform inter-concept data format: a bounded vector of 16-bit integers.
using FeatureVector = std::vector<std::int16_t>;

bool feature_vector_ok(const FeatureVector& v);

// The 65-opcode instruction set. Two registers A and B, flags Z and N.
// Addressing-mode variants are distinct opcodes.
enum class Opcode : std::uint16_t {
  // loads (var = input slot, [k] direct element, [B]/[A] register-indexed)
  MovASlotK, MovBSlotK, MovASlotB, MovBSlotA, MovAImm, MovBImm,
  // register moves
  MovAB, MovBA, Swap,
  // ALU, destination A, operand B or immediate
  AddAB, AddAImm, SubAB, SubAImm, MulAB, MulAImm, DivAB, DivAImm,
  ModAB, ModAImm, AndAB, AndAImm, OrAB, OrAImm, XorAB, XorAImm,
  ShlAB, ShlAImm, ShrAB, ShrAImm, MinAB, MinAImm, MaxAB, MaxAImm,
  CmpAB, CmpAImm,
  // ALU, destination B, operand A
  AddBA, SubBA, AndBA, OrBA,
  // unary
  NegA, NegB, AbsA, AbsB, NotA, NotB, IncA, IncB, DecA, DecB,
  // output construction
  AppendA, AppendB, AppendSlotK,
  // input length into a register
  LenA, LenB,
  // pipeline splice: output buffer becomes input slot 0, output cleared
  Flip,
  Nop,
  // control flow
  Jz, Jnz, Jlt, Jgt, Jle, Jge, Jmp,
  Ret, Exit,
};

inline constexpr std::size_t kOpcodeCount = 65;

enum class OperandKind : std::uint8_t { None, Slot, Elem, Imm, Target };

enum class OpFamily : std::uint8_t {
  Load, Move, Alu, Append, Len, Flip, Nop, Jump, Terminal
};

struct OpcodeDescriptor {
  Opcode op;
  std::string_view mnemonic;          // assembly mnemonic
  std::string_view operand_pattern;   // canonical operand shape, for docs
  std::array<OperandKind, 2> operands;
  OpFamily family;
  bool conditional_jump;
};

// The complete, immutable ISA table (exactly 65 entries).
const std::array<OpcodeDescriptor, kOpcodeCount>& instruction_set();
const OpcodeDescriptor& descriptor(Opcode op);

struct Instruction {
  Opcode op;
  std::uint16_t a = 0;  // first operand word (slot / imm / target)
  std::uint16_t b = 0;  // second operand word (element index)

  bool operator==(const Instruction&) const = default;
};

struct Codelet {
  std::vector<Instruction> instructions;
  std::uint16_t arity = 1;  // number of input slots

  bool operator==(const Codelet&) const = default;
};

enum class OutcomeKind : std::uint8_t { Positive, Negative, FuelExhausted };

struct ExecOutcome {
  OutcomeKind kind;
  FeatureVector output;  // populated only for Positive
  std::uint64_t steps_used = 0;

  bool positive() const { return kind == OutcomeKind::Positive; }
  bool operator==(const ExecOutcome&) const = default;
};

enum class Violation : std::uint8_t {
  MissingRet, MissingExit, NoSeparatingBranch, BadJumpTarget, BadOperands
};

std::string_view violation_name(Violation v);

// Static checks: RET and EXIT present, a reachable conditional jump whose two
// successors lead to RET and EXIT respectively, jump targets in range,
// operand words legal for the codelet's arity. Never throws.
std::vector<Violation> validate(const Codelet& codelet);

// Runs the codelet on the given inputs with a step budget. Pure function of
// its arguments. Throws ArityMismatch / InvalidCodelet on precondition
// violations; never throws once running.
ExecOutcome execute(const Codelet& codelet, const std::vector<FeatureVector>& inputs,
                    std::uint64_t fuel);

// Text form: optional ".arity N" directive, then one instruction per line,
// "MNEMONIC operand{, operand}", ';' starts a comment.
Codelet assemble(const std::string& text);
std::string disassemble(const Codelet& codelet);
std::string disassemble_instruction(const Instruction& ins);

// Binary form: version byte, arity byte, u16 instruction count, then three
// little-endian u16 words per instruction (opcode, operand, operand).
std::vector<std::uint8_t> to_binary(const Codelet& codelet);
Codelet from_binary(const std::vector<std::uint8_t>& bytes);

}  // namespace bspre
