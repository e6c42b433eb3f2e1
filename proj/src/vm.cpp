#include "bspre/vm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace bspre {

bool feature_vector_ok(const FeatureVector& v) { return v.size() <= kMaxVecLen; }

namespace {

using OK = OperandKind;

constexpr std::array<OpcodeDescriptor, kOpcodeCount> kIsa{{
    {Opcode::MovASlotK, "MOV", "A, var[k]", {OK::Slot, OK::Elem}, OpFamily::Load, false},
    {Opcode::MovBSlotK, "MOV", "B, var[k]", {OK::Slot, OK::Elem}, OpFamily::Load, false},
    {Opcode::MovASlotB, "MOV", "A, var[B]", {OK::Slot, OK::None}, OpFamily::Load, false},
    {Opcode::MovBSlotA, "MOV", "B, var[A]", {OK::Slot, OK::None}, OpFamily::Load, false},
    {Opcode::MovAImm, "MOV", "A, #imm", {OK::Imm, OK::None}, OpFamily::Load, false},
    {Opcode::MovBImm, "MOV", "B, #imm", {OK::Imm, OK::None}, OpFamily::Load, false},
    {Opcode::MovAB, "MOV", "A, B", {OK::None, OK::None}, OpFamily::Move, false},
    {Opcode::MovBA, "MOV", "B, A", {OK::None, OK::None}, OpFamily::Move, false},
    {Opcode::Swap, "SWAP", "", {OK::None, OK::None}, OpFamily::Move, false},
    {Opcode::AddAB, "ADD", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::AddAImm, "ADD", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::SubAB, "SUB", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::SubAImm, "SUB", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::MulAB, "MUL", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::MulAImm, "MUL", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::DivAB, "DIV", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::DivAImm, "DIV", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::ModAB, "MOD", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::ModAImm, "MOD", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::AndAB, "AND", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::AndAImm, "AND", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::OrAB, "OR", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::OrAImm, "OR", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::XorAB, "XOR", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::XorAImm, "XOR", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::ShlAB, "SHL", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::ShlAImm, "SHL", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::ShrAB, "SHR", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::ShrAImm, "SHR", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::MinAB, "MIN", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::MinAImm, "MIN", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::MaxAB, "MAX", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::MaxAImm, "MAX", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::CmpAB, "CMP", "A, B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::CmpAImm, "CMP", "A, #imm", {OK::Imm, OK::None}, OpFamily::Alu, false},
    {Opcode::AddBA, "ADD", "B, A", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::SubBA, "SUB", "B, A", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::AndBA, "AND", "B, A", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::OrBA, "OR", "B, A", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::NegA, "NEG", "A", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::NegB, "NEG", "B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::AbsA, "ABS", "A", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::AbsB, "ABS", "B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::NotA, "NOT", "A", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::NotB, "NOT", "B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::IncA, "INC", "A", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::IncB, "INC", "B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::DecA, "DEC", "A", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::DecB, "DEC", "B", {OK::None, OK::None}, OpFamily::Alu, false},
    {Opcode::AppendA, "APPEND", "A", {OK::None, OK::None}, OpFamily::Append, false},
    {Opcode::AppendB, "APPEND", "B", {OK::None, OK::None}, OpFamily::Append, false},
    {Opcode::AppendSlotK, "APPEND", "var[k]", {OK::Slot, OK::Elem}, OpFamily::Append, false},
    {Opcode::LenA, "LEN", "A, var", {OK::Slot, OK::None}, OpFamily::Len, false},
    {Opcode::LenB, "LEN", "B, var", {OK::Slot, OK::None}, OpFamily::Len, false},
    {Opcode::Flip, "FLIP", "", {OK::None, OK::None}, OpFamily::Flip, false},
    {Opcode::Nop, "NOP", "", {OK::None, OK::None}, OpFamily::Nop, false},
    {Opcode::Jz, "JZ", "target", {OK::Target, OK::None}, OpFamily::Jump, true},
    {Opcode::Jnz, "JNZ", "target", {OK::Target, OK::None}, OpFamily::Jump, true},
    {Opcode::Jlt, "JLT", "target", {OK::Target, OK::None}, OpFamily::Jump, true},
    {Opcode::Jgt, "JGT", "target", {OK::Target, OK::None}, OpFamily::Jump, true},
    {Opcode::Jle, "JLE", "target", {OK::Target, OK::None}, OpFamily::Jump, true},
    {Opcode::Jge, "JGE", "target", {OK::Target, OK::None}, OpFamily::Jump, true},
    {Opcode::Jmp, "JMP", "target", {OK::Target, OK::None}, OpFamily::Jump, false},
    {Opcode::Ret, "RET", "", {OK::None, OK::None}, OpFamily::Terminal, false},
    {Opcode::Exit, "EXIT", "", {OK::None, OK::None}, OpFamily::Terminal, false},
}};

inline std::int16_t wrap(std::int32_t v) {
  return static_cast<std::int16_t>(static_cast<std::uint16_t>(v));
}

}  // namespace

const std::array<OpcodeDescriptor, kOpcodeCount>& instruction_set() { return kIsa; }

const OpcodeDescriptor& descriptor(Opcode op) {
  return kIsa[static_cast<std::size_t>(op)];
}

std::string_view violation_name(Violation v) {
  switch (v) {
    case Violation::MissingRet: return "MissingRet";
    case Violation::MissingExit: return "MissingExit";
    case Violation::NoSeparatingBranch: return "NoSeparatingBranch";
    case Violation::BadJumpTarget: return "BadJumpTarget";
    case Violation::BadOperands: return "BadOperands";
  }
  return "?";
}

std::vector<Violation> validate(const Codelet& c) {
  std::vector<Violation> out;
  auto add = [&](Violation v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };

  const std::size_t n = c.instructions.size();
  if (n == 0 || n > kMaxCodeletLen || c.arity == 0) add(Violation::BadOperands);

  bool has_ret = false, has_exit = false;
  for (const Instruction& ins : c.instructions) {
    if (static_cast<std::size_t>(ins.op) >= kOpcodeCount) {
      add(Violation::BadOperands);
      continue;
    }
    const OpcodeDescriptor& d = descriptor(ins.op);
    if (ins.op == Opcode::Ret) has_ret = true;
    if (ins.op == Opcode::Exit) has_exit = true;
    if (d.operands[0] == OK::Slot && ins.a >= c.arity) add(Violation::BadOperands);
    if (d.operands[0] == OK::Target && ins.a >= n) add(Violation::BadJumpTarget);
  }
  if (!has_ret) add(Violation::MissingRet);
  if (!has_exit) add(Violation::MissingExit);
  if (n == 0) return out;
  // Control-flow analysis assumes in-range targets.
  if (std::find(out.begin(), out.end(), Violation::BadJumpTarget) != out.end()) return out;

  // Successor sets. Falling off the end reaches neither RET nor EXIT.
  auto successors = [&](std::size_t i, std::size_t succ[2]) -> int {
    const Instruction& ins = c.instructions[i];
    if (static_cast<std::size_t>(ins.op) >= kOpcodeCount) return 0;
    const OpcodeDescriptor& d = descriptor(ins.op);
    if (d.family == OpFamily::Terminal) return 0;
    if (ins.op == Opcode::Jmp) {
      succ[0] = ins.a;
      return 1;
    }
    int k = 0;
    if (d.conditional_jump) succ[k++] = ins.a;
    if (i + 1 < n) succ[k++] = i + 1;
    return k;
  };

  std::vector<char> reachable(n, 0);
  {
    std::vector<std::size_t> stack{0};
    reachable[0] = 1;
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      std::size_t s[2];
      int k = successors(i, s);
      for (int j = 0; j < k; ++j)
        if (!reachable[s[j]]) {
          reachable[s[j]] = 1;
          stack.push_back(s[j]);
        }
    }
  }

  std::vector<char> to_ret(n, 0), to_exit(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    to_ret[i] = c.instructions[i].op == Opcode::Ret;
    to_exit[i] = c.instructions[i].op == Opcode::Exit;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t s[2];
      int k = successors(i, s);
      for (int j = 0; j < k; ++j) {
        if (to_ret[s[j]] && !to_ret[i]) { to_ret[i] = 1; changed = true; }
        if (to_exit[s[j]] && !to_exit[i]) { to_exit[i] = 1; changed = true; }
      }
    }
  }

  bool separated = false;
  for (std::size_t i = 0; i < n && !separated; ++i) {
    if (!reachable[i]) continue;
    const Instruction& ins = c.instructions[i];
    if (static_cast<std::size_t>(ins.op) >= kOpcodeCount) continue;
    if (!descriptor(ins.op).conditional_jump) continue;
    if (i + 1 >= n) continue;
    std::size_t taken = ins.a, fall = i + 1;
    separated = (to_ret[taken] && to_exit[fall]) || (to_exit[taken] && to_ret[fall]);
  }
  if (!separated) add(Violation::NoSeparatingBranch);
  return out;
}

ExecOutcome execute(const Codelet& c, const std::vector<FeatureVector>& inputs,
                    std::uint64_t fuel) {
  if (inputs.size() != c.arity)
    throw ArityMismatch("execute: got " + std::to_string(inputs.size()) +
                        " inputs, codelet arity " + std::to_string(c.arity));
  // Execution needs structural soundness only; the RET/EXIT branch-separation
  // rule is a gate on concept codelets, enforced where codelets are adopted.
  for (Violation v : validate(c)) {
    if (v == Violation::BadJumpTarget || v == Violation::BadOperands)
      throw InvalidCodelet(std::string("execute: ") + std::string(violation_name(v)));
  }
  if (fuel == 0) throw DomainError("execute: fuel must be >= 1");
  for (const FeatureVector& v : inputs)
    if (!feature_vector_ok(v)) throw DomainError("execute: input vector too long");

  std::vector<FeatureVector> in = inputs;  // FLIP rewrites slot 0
  FeatureVector out;
  std::int16_t ra = 0, rb = 0;
  bool fz = false, fn = false;
  const std::size_t n = c.instructions.size();
  std::size_t pc = 0;
  std::uint64_t steps = 0;

  auto flags = [&](std::int16_t v) {
    fz = (v == 0);
    fn = (v < 0);
  };
  auto slot_read = [&](std::uint16_t slot, std::int32_t idx) -> std::int16_t {
    if (slot >= in.size()) return 0;
    const FeatureVector& v = in[slot];
    if (idx < 0 || static_cast<std::size_t>(idx) >= v.size()) return 0;
    return v[static_cast<std::size_t>(idx)];
  };

  while (true) {
    if (pc >= n) return {OutcomeKind::Negative, {}, steps};  // fell off the end
    if (steps == fuel) return {OutcomeKind::FuelExhausted, {}, steps};
    ++steps;
    const Instruction& ins = c.instructions[pc];
    const std::int16_t imm = static_cast<std::int16_t>(ins.a);
    bool jumped = false;

    switch (ins.op) {
      case Opcode::MovASlotK: ra = slot_read(ins.a, ins.b); flags(ra); break;
      case Opcode::MovBSlotK: rb = slot_read(ins.a, ins.b); flags(rb); break;
      case Opcode::MovASlotB: ra = slot_read(ins.a, rb); flags(ra); break;
      case Opcode::MovBSlotA: rb = slot_read(ins.a, ra); flags(rb); break;
      case Opcode::MovAImm: ra = imm; flags(ra); break;
      case Opcode::MovBImm: rb = imm; flags(rb); break;
      case Opcode::MovAB: ra = rb; flags(ra); break;
      case Opcode::MovBA: rb = ra; flags(rb); break;
      case Opcode::Swap: std::swap(ra, rb); flags(ra); break;

      case Opcode::AddAB: ra = wrap(ra + rb); flags(ra); break;
      case Opcode::AddAImm: ra = wrap(ra + imm); flags(ra); break;
      case Opcode::SubAB: ra = wrap(ra - rb); flags(ra); break;
      case Opcode::SubAImm: ra = wrap(ra - imm); flags(ra); break;
      case Opcode::MulAB: ra = wrap(ra * rb); flags(ra); break;
      case Opcode::MulAImm: ra = wrap(ra * imm); flags(ra); break;
      case Opcode::DivAB: ra = rb == 0 ? std::int16_t{0} : wrap(ra / rb); flags(ra); break;
      case Opcode::DivAImm: ra = imm == 0 ? std::int16_t{0} : wrap(ra / imm); flags(ra); break;
      case Opcode::ModAB: ra = rb == 0 ? std::int16_t{0} : wrap(ra % rb); flags(ra); break;
      case Opcode::ModAImm: ra = imm == 0 ? std::int16_t{0} : wrap(ra % imm); flags(ra); break;
      case Opcode::AndAB: ra = wrap(ra & rb); flags(ra); break;
      case Opcode::AndAImm: ra = wrap(ra & imm); flags(ra); break;
      case Opcode::OrAB: ra = wrap(ra | rb); flags(ra); break;
      case Opcode::OrAImm: ra = wrap(ra | imm); flags(ra); break;
      case Opcode::XorAB: ra = wrap(ra ^ rb); flags(ra); break;
      case Opcode::XorAImm: ra = wrap(ra ^ imm); flags(ra); break;
      case Opcode::ShlAB: ra = wrap(static_cast<std::uint16_t>(ra) << (rb & 15)); flags(ra); break;
      case Opcode::ShlAImm: ra = wrap(static_cast<std::uint16_t>(ra) << (imm & 15)); flags(ra); break;
      case Opcode::ShrAB: ra = wrap(static_cast<std::uint16_t>(ra) >> (rb & 15)); flags(ra); break;
      case Opcode::ShrAImm: ra = wrap(static_cast<std::uint16_t>(ra) >> (imm & 15)); flags(ra); break;
      case Opcode::MinAB: ra = std::min(ra, rb); flags(ra); break;
      case Opcode::MinAImm: ra = std::min(ra, imm); flags(ra); break;
      case Opcode::MaxAB: ra = std::max(ra, rb); flags(ra); break;
      case Opcode::MaxAImm: ra = std::max(ra, imm); flags(ra); break;
      case Opcode::CmpAB: flags(wrap(ra - rb)); break;
      case Opcode::CmpAImm: flags(wrap(ra - imm)); break;

      case Opcode::AddBA: rb = wrap(rb + ra); flags(rb); break;
      case Opcode::SubBA: rb = wrap(rb - ra); flags(rb); break;
      case Opcode::AndBA: rb = wrap(rb & ra); flags(rb); break;
      case Opcode::OrBA: rb = wrap(rb | ra); flags(rb); break;

      case Opcode::NegA: ra = wrap(-ra); flags(ra); break;
      case Opcode::NegB: rb = wrap(-rb); flags(rb); break;
      case Opcode::AbsA: ra = ra < 0 ? wrap(-ra) : ra; flags(ra); break;
      case Opcode::AbsB: rb = rb < 0 ? wrap(-rb) : rb; flags(rb); break;
      case Opcode::NotA: ra = wrap(~ra); flags(ra); break;
      case Opcode::NotB: rb = wrap(~rb); flags(rb); break;
      case Opcode::IncA: ra = wrap(ra + 1); flags(ra); break;
      case Opcode::IncB: rb = wrap(rb + 1); flags(rb); break;
      case Opcode::DecA: ra = wrap(ra - 1); flags(ra); break;
      case Opcode::DecB: rb = wrap(rb - 1); flags(rb); break;

      case Opcode::AppendA:
      case Opcode::AppendB:
      case Opcode::AppendSlotK: {
        std::int16_t v = ins.op == Opcode::AppendA   ? ra
                         : ins.op == Opcode::AppendB ? rb
                                                     : slot_read(ins.a, ins.b);
        if (out.size() == kMaxVecLen) return {OutcomeKind::Negative, {}, steps};
        out.push_back(v);
        flags(v);
        break;
      }

      case Opcode::LenA:
        ra = ins.a < in.size() ? wrap(static_cast<std::int32_t>(in[ins.a].size())) : 0;
        flags(ra);
        break;
      case Opcode::LenB:
        rb = ins.a < in.size() ? wrap(static_cast<std::int32_t>(in[ins.a].size())) : 0;
        flags(rb);
        break;

      case Opcode::Flip:
        // Restart the machine on its own output: the spliced second stage must
        // see exactly the pristine entry state a separate execution would.
        in[0] = std::move(out);
        out.clear();
        ra = rb = 0;
        fz = fn = false;
        break;

      case Opcode::Nop: break;

      case Opcode::Jz: if (fz) { pc = ins.a; jumped = true; } break;
      case Opcode::Jnz: if (!fz) { pc = ins.a; jumped = true; } break;
      case Opcode::Jlt: if (fn) { pc = ins.a; jumped = true; } break;
      case Opcode::Jgt: if (!fn && !fz) { pc = ins.a; jumped = true; } break;
      case Opcode::Jle: if (fn || fz) { pc = ins.a; jumped = true; } break;
      case Opcode::Jge: if (!fn) { pc = ins.a; jumped = true; } break;
      case Opcode::Jmp: pc = ins.a; jumped = true; break;

      case Opcode::Ret: return {OutcomeKind::Positive, std::move(out), steps};
      case Opcode::Exit: return {OutcomeKind::Negative, {}, steps};
    }
    if (!jumped) ++pc;
  }
}

// ---------------------------------------------------------------------------
// Assembly text
// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string s) {
  auto issp = [](unsigned char ch) { return std::isspace(ch); };
  while (!s.empty() && issp(s.front())) s.erase(s.begin());
  while (!s.empty() && issp(s.back())) s.pop_back();
  return s;
}

bool parse_int(const std::string& s, long& value) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, value);
  return ec == std::errc{} && p == last;
}

struct OperandToken {
  enum Kind { RegA, RegB, Imm, SlotElem, SlotRegB, SlotRegA, SlotOnly, Number } kind;
  long value = 0;   // imm / number / slot
  long index = 0;   // element index for SlotElem
};

OperandToken parse_operand(const std::string& raw, int line_no) {
  std::string s = trim(raw);
  if (s == "A") return {OperandToken::RegA};
  if (s == "B") return {OperandToken::RegB};
  if (!s.empty() && s[0] == '#') {
    long v;
    if (!parse_int(s.substr(1), v) || v < -32768 || v > 32767)
      throw ParseError(line_no, "bad immediate '" + s + "'");
    return {OperandToken::Imm, v};
  }
  if (s.rfind("var", 0) == 0) {
    auto lb = s.find('[');
    std::string numpart = lb == std::string::npos ? s.substr(3) : s.substr(3, lb - 3);
    long slot;
    if (!parse_int(numpart, slot) || slot < 1 || slot > 65535)
      throw ParseError(line_no, "bad slot in '" + s + "'");
    if (lb == std::string::npos) return {OperandToken::SlotOnly, slot - 1};
    if (s.back() != ']') throw ParseError(line_no, "missing ']' in '" + s + "'");
    std::string idx = s.substr(lb + 1, s.size() - lb - 2);
    if (idx == "B") return {OperandToken::SlotRegB, slot - 1};
    if (idx == "A") return {OperandToken::SlotRegA, slot - 1};
    long k;
    if (!parse_int(idx, k) || k < 0 || k > 65535)
      throw ParseError(line_no, "bad element index in '" + s + "'");
    return {OperandToken::SlotElem, slot - 1, k};
  }
  long v;
  if (parse_int(s, v) && v >= 0 && v <= 65535) return {OperandToken::Number, v};
  throw ParseError(line_no, "unrecognized operand '" + s + "'");
}

Instruction parse_line(const std::string& mnemonic, const std::vector<OperandToken>& ops,
                       int line_no) {
  auto bad = [&]() -> Instruction {
    throw ParseError(line_no, "bad operands for " + mnemonic);
  };
  auto need = [&](std::size_t k) {
    if (ops.size() != k) bad();
  };
  using T = OperandToken;

  if (mnemonic == "MOV") {
    need(2);
    bool dst_a = ops[0].kind == T::RegA;
    if (!dst_a && ops[0].kind != T::RegB) return bad();
    switch (ops[1].kind) {
      case T::SlotElem:
        return {dst_a ? Opcode::MovASlotK : Opcode::MovBSlotK,
                static_cast<std::uint16_t>(ops[1].value),
                static_cast<std::uint16_t>(ops[1].index)};
      case T::SlotRegB:
        if (!dst_a) return bad();
        return {Opcode::MovASlotB, static_cast<std::uint16_t>(ops[1].value)};
      case T::SlotRegA:
        if (dst_a) return bad();
        return {Opcode::MovBSlotA, static_cast<std::uint16_t>(ops[1].value)};
      case T::Imm:
        return {dst_a ? Opcode::MovAImm : Opcode::MovBImm,
                static_cast<std::uint16_t>(static_cast<std::int16_t>(ops[1].value))};
      case T::RegB:
        if (!dst_a) return bad();
        return {Opcode::MovAB};
      case T::RegA:
        if (dst_a) return bad();
        return {Opcode::MovBA};
      default:
        return bad();
    }
  }

  struct BinAlu {
    std::string_view name;
    Opcode ab, aimm;
    Opcode ba;  // Nop marks "no B,A form"
  };
  static constexpr BinAlu kBin[] = {
      {"ADD", Opcode::AddAB, Opcode::AddAImm, Opcode::AddBA},
      {"SUB", Opcode::SubAB, Opcode::SubAImm, Opcode::SubBA},
      {"MUL", Opcode::MulAB, Opcode::MulAImm, Opcode::Nop},
      {"DIV", Opcode::DivAB, Opcode::DivAImm, Opcode::Nop},
      {"MOD", Opcode::ModAB, Opcode::ModAImm, Opcode::Nop},
      {"AND", Opcode::AndAB, Opcode::AndAImm, Opcode::AndBA},
      {"OR", Opcode::OrAB, Opcode::OrAImm, Opcode::OrBA},
      {"XOR", Opcode::XorAB, Opcode::XorAImm, Opcode::Nop},
      {"SHL", Opcode::ShlAB, Opcode::ShlAImm, Opcode::Nop},
      {"SHR", Opcode::ShrAB, Opcode::ShrAImm, Opcode::Nop},
      {"MIN", Opcode::MinAB, Opcode::MinAImm, Opcode::Nop},
      {"MAX", Opcode::MaxAB, Opcode::MaxAImm, Opcode::Nop},
      {"CMP", Opcode::CmpAB, Opcode::CmpAImm, Opcode::Nop},
  };
  for (const BinAlu& e : kBin) {
    if (mnemonic != e.name) continue;
    need(2);
    if (ops[0].kind == T::RegA) {
      if (ops[1].kind == T::RegB) return {e.ab};
      if (ops[1].kind == T::Imm)
        return {e.aimm, static_cast<std::uint16_t>(static_cast<std::int16_t>(ops[1].value))};
      return bad();
    }
    if (ops[0].kind == T::RegB && ops[1].kind == T::RegA && e.ba != Opcode::Nop)
      return {e.ba};
    return bad();
  }

  struct Unary {
    std::string_view name;
    Opcode a, b;
  };
  static constexpr Unary kUn[] = {
      {"NEG", Opcode::NegA, Opcode::NegB}, {"ABS", Opcode::AbsA, Opcode::AbsB},
      {"NOT", Opcode::NotA, Opcode::NotB}, {"INC", Opcode::IncA, Opcode::IncB},
      {"DEC", Opcode::DecA, Opcode::DecB},
  };
  for (const Unary& e : kUn) {
    if (mnemonic != e.name) continue;
    need(1);
    if (ops[0].kind == T::RegA) return {e.a};
    if (ops[0].kind == T::RegB) return {e.b};
    return bad();
  }

  if (mnemonic == "APPEND") {
    need(1);
    if (ops[0].kind == T::RegA) return {Opcode::AppendA};
    if (ops[0].kind == T::RegB) return {Opcode::AppendB};
    if (ops[0].kind == T::SlotElem)
      return {Opcode::AppendSlotK, static_cast<std::uint16_t>(ops[0].value),
              static_cast<std::uint16_t>(ops[0].index)};
    return bad();
  }
  if (mnemonic == "LEN") {
    need(2);
    if (ops[1].kind != T::SlotOnly) return bad();
    if (ops[0].kind == T::RegA)
      return {Opcode::LenA, static_cast<std::uint16_t>(ops[1].value)};
    if (ops[0].kind == T::RegB)
      return {Opcode::LenB, static_cast<std::uint16_t>(ops[1].value)};
    return bad();
  }

  static constexpr std::pair<std::string_view, Opcode> kJumps[] = {
      {"JZ", Opcode::Jz},   {"JNZ", Opcode::Jnz}, {"JLT", Opcode::Jlt},
      {"JGT", Opcode::Jgt}, {"JLE", Opcode::Jle}, {"JGE", Opcode::Jge},
      {"JMP", Opcode::Jmp},
  };
  for (auto [name, op] : kJumps) {
    if (mnemonic != name) continue;
    need(1);
    if (ops[0].kind != T::Number) return bad();
    return {op, static_cast<std::uint16_t>(ops[0].value)};
  }

  static constexpr std::pair<std::string_view, Opcode> kNullary[] = {
      {"SWAP", Opcode::Swap}, {"FLIP", Opcode::Flip}, {"NOP", Opcode::Nop},
      {"RET", Opcode::Ret},   {"EXIT", Opcode::Exit},
  };
  for (auto [name, op] : kNullary) {
    if (mnemonic != name) continue;
    need(0);
    return {op};
  }

  throw ParseError(line_no, "unknown mnemonic '" + mnemonic + "'");
}

}  // namespace

Codelet assemble(const std::string& text) {
  Codelet c;
  c.arity = 1;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool saw_instruction = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto sc = line.find(';');
    if (sc != std::string::npos) line.resize(sc);
    line = trim(line);
    if (line.empty()) continue;

    if (line.rfind(".arity", 0) == 0) {
      if (saw_instruction)
        throw ParseError(line_no, ".arity must precede instructions");
      long a;
      if (!parse_int(trim(line.substr(6)), a) || a < 1 || a > 65535)
        throw ParseError(line_no, "bad .arity value");
      c.arity = static_cast<std::uint16_t>(a);
      continue;
    }

    auto sp = line.find_first_of(" \t");
    std::string mnemonic = sp == std::string::npos ? line : line.substr(0, sp);
    std::string rest = sp == std::string::npos ? "" : trim(line.substr(sp + 1));
    std::vector<OperandToken> ops;
    if (!rest.empty()) {
      std::size_t start = 0;
      while (true) {
        auto comma = rest.find(',', start);
        std::string piece =
            comma == std::string::npos ? rest.substr(start) : rest.substr(start, comma - start);
        ops.push_back(parse_operand(piece, line_no));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    c.instructions.push_back(parse_line(mnemonic, ops, line_no));
    saw_instruction = true;
  }
  if (c.instructions.empty()) throw ParseError(line_no, "no instructions");
  if (c.instructions.size() > kMaxCodeletLen)
    throw ParseError(line_no, "codelet exceeds " + std::to_string(kMaxCodeletLen) +
                                  " instructions");
  return c;
}

std::string disassemble_instruction(const Instruction& ins) {
  const OpcodeDescriptor& d = descriptor(ins.op);
  std::string m(d.mnemonic);
  auto slot = [&] { return "var" + std::to_string(ins.a + 1); };
  auto imm = [&] { return "#" + std::to_string(static_cast<std::int16_t>(ins.a)); };
  switch (ins.op) {
    case Opcode::MovASlotK: return m + " A, " + slot() + "[" + std::to_string(ins.b) + "]";
    case Opcode::MovBSlotK: return m + " B, " + slot() + "[" + std::to_string(ins.b) + "]";
    case Opcode::MovASlotB: return m + " A, " + slot() + "[B]";
    case Opcode::MovBSlotA: return m + " B, " + slot() + "[A]";
    case Opcode::MovAImm: return m + " A, " + imm();
    case Opcode::MovBImm: return m + " B, " + imm();
    case Opcode::MovAB: return m + " A, B";
    case Opcode::MovBA: return m + " B, A";
    case Opcode::AppendSlotK: return m + " " + slot() + "[" + std::to_string(ins.b) + "]";
    case Opcode::LenA: return m + " A, " + slot();
    case Opcode::LenB: return m + " B, " + slot();
    default: break;
  }
  switch (d.family) {
    case OpFamily::Jump: return m + " " + std::to_string(ins.a);
    default: break;
  }
  // remaining forms encode everything in the opcode
  std::string pat(d.operand_pattern);
  if (pat.empty()) return m;
  if (d.operands[0] == OperandKind::Imm) {
    // "A, #imm" pattern
    return m + " A, " + imm();
  }
  return m + " " + pat;
}

std::string disassemble(const Codelet& c) {
  std::string out = ".arity " + std::to_string(c.arity) + "\n";
  for (const Instruction& ins : c.instructions) {
    out += disassemble_instruction(ins);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary form
// ---------------------------------------------------------------------------

namespace {
constexpr std::uint8_t kCodeletBinVersion = 1;

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
}  // namespace

std::vector<std::uint8_t> to_binary(const Codelet& c) {
  std::vector<std::uint8_t> b;
  b.push_back(kCodeletBinVersion);
  b.push_back(static_cast<std::uint8_t>(c.arity));
  put_u16(b, static_cast<std::uint16_t>(c.instructions.size()));
  for (const Instruction& ins : c.instructions) {
    put_u16(b, static_cast<std::uint16_t>(ins.op));
    put_u16(b, ins.a);
    put_u16(b, ins.b);
  }
  return b;
}

Codelet from_binary(const std::vector<std::uint8_t>& bytes) {
  auto u16 = [&](std::size_t off) -> std::uint16_t {
    return static_cast<std::uint16_t>(bytes[off] | (bytes[off + 1] << 8));
  };
  if (bytes.size() < 4) throw InvalidCodelet("binary codelet: truncated header");
  if (bytes[0] != kCodeletBinVersion)
    throw InvalidCodelet("binary codelet: unsupported version " + std::to_string(bytes[0]));
  Codelet c;
  c.arity = bytes[1];
  std::size_t count = u16(2);
  if (bytes.size() != 4 + count * 6)
    throw InvalidCodelet("binary codelet: size mismatch");
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t off = 4 + i * 6;
    std::uint16_t op = u16(off);
    if (op >= kOpcodeCount) throw InvalidCodelet("binary codelet: bad opcode");
    c.instructions.push_back({static_cast<Opcode>(op), u16(off + 2), u16(off + 4)});
  }
  return c;
}

}  // namespace bspre
