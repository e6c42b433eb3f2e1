#include "bspre/codegen.hpp"

#include <algorithm>
#include <array>

#include "bspre/rng.hpp"

namespace bspre {

bool gen_params_ok(const GenParams& p) {
  if (p.min_len < 1 || p.min_len > p.max_len || p.max_len > kMaxCodeletLen) return false;
  if (p.arity < 1) return false;
  const GenWeights& w = p.weights;
  double vals[] = {w.load, w.move, w.alu, w.append, w.len, w.nop};
  double sum = 0;
  for (double v : vals) {
    if (v < 0) return false;
    sum += v;
  }
  return sum > 0;
}

namespace {

constexpr Opcode kLoadOps[] = {Opcode::MovASlotK, Opcode::MovBSlotK, Opcode::MovASlotB,
                               Opcode::MovBSlotA, Opcode::MovAImm, Opcode::MovBImm};
constexpr Opcode kMoveOps[] = {Opcode::MovAB, Opcode::MovBA, Opcode::Swap};
constexpr Opcode kAluOps[] = {
    Opcode::AddAB, Opcode::AddAImm, Opcode::SubAB, Opcode::SubAImm, Opcode::MulAB,
    Opcode::MulAImm, Opcode::DivAB, Opcode::DivAImm, Opcode::ModAB, Opcode::ModAImm,
    Opcode::AndAB, Opcode::AndAImm, Opcode::OrAB, Opcode::OrAImm, Opcode::XorAB,
    Opcode::XorAImm, Opcode::ShlAB, Opcode::ShlAImm, Opcode::ShrAB, Opcode::ShrAImm,
    Opcode::MinAB, Opcode::MinAImm, Opcode::MaxAB, Opcode::MaxAImm, Opcode::CmpAB,
    Opcode::CmpAImm, Opcode::AddBA, Opcode::SubBA, Opcode::AndBA, Opcode::OrBA,
    Opcode::NegA, Opcode::NegB, Opcode::AbsA, Opcode::AbsB, Opcode::NotA,
    Opcode::NotB, Opcode::IncA, Opcode::IncB, Opcode::DecA, Opcode::DecB};
constexpr Opcode kAppendOps[] = {Opcode::AppendA, Opcode::AppendB, Opcode::AppendSlotK};
constexpr Opcode kLenOps[] = {Opcode::LenA, Opcode::LenB};
constexpr Opcode kCondJumps[] = {Opcode::Jz, Opcode::Jnz, Opcode::Jlt,
                                 Opcode::Jgt, Opcode::Jle, Opcode::Jge};

std::uint16_t random_imm(std::uint64_t& rng) {
  // Half the immediates are small so comparisons against near-zero inputs
  // (binary glyph pixels, counts) partition nontrivially.
  if (rng_next(rng) & 1) {
    long v = static_cast<long>(rng_below(rng, 9)) - 4;  // [-4, 4]
    return static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
  }
  return static_cast<std::uint16_t>(rng_next(rng) & 0xffff);
}

Instruction fill_operands(Opcode op, const GenParams& p, std::uint64_t& rng) {
  Instruction ins{op, 0, 0};
  const OpcodeDescriptor& d = descriptor(op);
  if (d.operands[0] == OperandKind::Slot)
    ins.a = static_cast<std::uint16_t>(rng_below(rng, p.arity));
  else if (d.operands[0] == OperandKind::Imm)
    ins.a = random_imm(rng);
  // Element 0 is the only index short vectors are sure to have; favor it so
  // loads usually read live data instead of the out-of-range default.
  if (d.operands[1] == OperandKind::Elem)
    ins.b = (rng_next(rng) & 1) ? 0 : static_cast<std::uint16_t>(rng_below(rng, 8));
  return ins;
}

Instruction pool_draw(const GenParams& p, std::uint64_t& rng) {
  const GenWeights& w = p.weights;
  const double cum[6] = {w.load,
                         w.load + w.move,
                         w.load + w.move + w.alu,
                         w.load + w.move + w.alu + w.append,
                         w.load + w.move + w.alu + w.append + w.len,
                         w.load + w.move + w.alu + w.append + w.len + w.nop};
  double u = rng_unit(rng) * cum[5];
  Opcode op;
  if (u < cum[0])
    op = kLoadOps[rng_below(rng, std::size(kLoadOps))];
  else if (u < cum[1])
    op = kMoveOps[rng_below(rng, std::size(kMoveOps))];
  else if (u < cum[2])
    op = kAluOps[rng_below(rng, std::size(kAluOps))];
  else if (u < cum[3])
    op = kAppendOps[rng_below(rng, std::size(kAppendOps))];
  else if (u < cum[4])
    op = kLenOps[rng_below(rng, std::size(kLenOps))];
  else
    op = Opcode::Nop;
  return fill_operands(op, p, rng);
}

Codelet build_once(const GenParams& p, std::uint64_t& rng) {
  const std::uint16_t lo = std::max<std::uint16_t>(p.min_len, 4);
  const std::uint16_t hi = std::max<std::uint16_t>(p.max_len, lo);
  const std::size_t len = lo + rng_below(rng, hi - lo + 1);

  // len = prefix + cond jump + fillerA + RET + fillerB + EXIT
  const std::size_t budget = len - 3;
  const std::size_t prefix = 1 + rng_below(rng, budget);
  const std::size_t rest = budget - prefix;
  const std::size_t filler_a = rest == 0 ? 0 : rng_below(rng, rest + 1);
  const std::size_t filler_b = rest - filler_a;

  Codelet c;
  c.arity = p.arity;
  c.instructions.reserve(len);

  // prefix: always starts by reading the input
  c.instructions.push_back(fill_operands(Opcode::MovASlotK, p, rng));
  for (std::size_t i = 1; i < prefix; ++i) c.instructions.push_back(pool_draw(p, rng));
  // Usually rig the branch on input-dependent flags (fresh load, then compare
  // against an immediate); otherwise whatever the filler left behind decides.
  if (prefix >= 2 && rng_below(rng, 4) != 0) {
    if (prefix >= 3) c.instructions[prefix - 2] = fill_operands(Opcode::MovASlotK, p, rng);
    c.instructions[prefix - 1] = fill_operands(Opcode::CmpAImm, p, rng);
  }

  const std::size_t exit_branch = prefix + 1 + filler_a + 1;
  c.instructions.push_back({kCondJumps[rng_below(rng, std::size(kCondJumps))],
                            static_cast<std::uint16_t>(exit_branch)});

  if (filler_a >= 1 && (rng_next(rng) & 1)) {
    c.instructions.push_back(fill_operands(Opcode::AppendSlotK, p, rng));
    for (std::size_t i = 1; i < filler_a; ++i) c.instructions.push_back(pool_draw(p, rng));
  } else {
    for (std::size_t i = 0; i < filler_a; ++i) c.instructions.push_back(pool_draw(p, rng));
  }
  c.instructions.push_back({Opcode::Ret});

  for (std::size_t i = 0; i < filler_b; ++i) c.instructions.push_back(pool_draw(p, rng));
  c.instructions.push_back({Opcode::Exit});
  return c;
}

Codelet minimal_template(const GenParams& p, std::uint64_t& rng) {
  Codelet c;
  c.arity = p.arity;
  c.instructions = {fill_operands(Opcode::MovASlotK, p, rng),
                    {Opcode::Jz, 3},
                    {Opcode::Ret},
                    {Opcode::Exit}};
  return c;
}

}  // namespace

Codelet generate(const GenParams& params, std::uint64_t& rng_state) {
  if (!gen_params_ok(params)) throw DomainError("generate: bad GenParams");
  for (int attempt = 0; attempt < 32; ++attempt) {
    Codelet c = build_once(params, rng_state);
    if (validate(c).empty()) return c;
  }
  return minimal_template(params, rng_state);
}

Codelet concatenate(const Codelet& first, const Codelet& second) {
  if (!validate(first).empty() || !validate(second).empty())
    throw InvalidCodelet("concatenate: operand fails validation");
  if (second.arity != 1)
    throw ArityMismatch("concatenate: second codelet must have arity 1");
  const std::size_t n1 = first.instructions.size();
  const std::size_t total = n1 + 1 + second.instructions.size();
  if (total > kMaxCodeletLen)
    throw InvalidCodelet("concatenate: result exceeds max codelet length");

  Codelet out;
  out.arity = first.arity;
  out.instructions.reserve(total);
  const std::uint16_t glue = static_cast<std::uint16_t>(n1);
  for (Instruction ins : first.instructions) {
    if (ins.op == Opcode::Ret) ins = {Opcode::Jmp, glue};
    out.instructions.push_back(ins);
  }
  out.instructions.push_back({Opcode::Flip});
  const std::uint16_t offset = static_cast<std::uint16_t>(n1 + 1);
  for (Instruction ins : second.instructions) {
    const OpcodeDescriptor& d = descriptor(ins.op);
    if (d.operands[0] == OperandKind::Target)
      ins.a = static_cast<std::uint16_t>(ins.a + offset);
    out.instructions.push_back(ins);
  }
  return out;
}

}  // namespace bspre
