#include "bspre/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_set>

#include "bspre/rng.hpp"

namespace bspre {

bool engine_params_ok(const EngineParams& p) {
  return p.alpha > 0.0 && p.alpha < 1.0 && p.gamma > 0.0 && p.gamma < 1.0 &&
         p.q_const > 0.0 && p.q_init > 0.0 && p.max_actions_per_tail >= 1 &&
         p.fuel >= 1 && p.prune_threshold >= 0.0 && p.prune_patience >= 1 &&
         p.window_capacity >= 1 && p.timing_decay > 0.0 && p.timing_decay < 1.0 &&
         p.gen_min_len >= 1 && p.gen_min_len <= p.gen_max_len &&
         p.gen_max_len <= kMaxCodeletLen;
}

Depository::Depository(EngineParams params, std::uint64_t seed)
    : rng_(seed), params_(params) {
  if (!engine_params_ok(params_)) throw DomainError("bad EngineParams");
}

Concept& Depository::concept_ref(ConceptId id) {
  auto it = concepts_.find(id);
  if (it == concepts_.end()) throw UnknownConcept("concept " + std::to_string(id));
  return it->second;
}

const Concept& Depository::concept_ref(ConceptId id) const {
  auto it = concepts_.find(id);
  if (it == concepts_.end()) throw UnknownConcept("concept " + std::to_string(id));
  return it->second;
}

ConceptId Depository::register_concept(Concept c) {
  c.id = next_id_++;
  c.created_at = tick_;
  c.window = OutcomeWindow(params_.window_capacity);
  c.timing = TimingStats(params_.timing_decay);
  ConceptId id = c.id;
  concepts_.emplace(id, std::move(c));
  return id;
}

ConceptId Depository::add_sensory(std::uint32_t channel) {
  Concept c;
  c.kind = ConceptKind::SensoryAtom;
  c.channel = channel;
  c.level = 0;
  return register_concept(std::move(c));
}

ConceptId Depository::add_actuator() {
  Concept c;
  c.kind = ConceptKind::ActuatorAtom;
  c.level = 1;
  return register_concept(std::move(c));
}

ConceptId Depository::add_codelet_concept(Codelet codelet, std::uint32_t level) {
  if (!validate(codelet).empty())
    throw InvalidCodelet("add_codelet_concept: codelet fails validation");
  Concept c;
  c.kind = ConceptKind::CodeletNode;
  c.codelet = std::move(codelet);
  c.level = level;
  return register_concept(std::move(c));
}

void Depository::add_action(ConceptId tail, ConceptId head, std::uint16_t slot) {
  const Concept& t = concept_ref(tail);
  const Concept& h = concept_ref(head);
  if (t.kind == ConceptKind::ActuatorAtom)
    throw BadSlot("actuator atoms have no outgoing actions");
  if (h.kind == ConceptKind::SensoryAtom)
    throw BadSlot("sensory atoms have no incoming actions");
  if (h.kind == ConceptKind::CodeletNode && slot >= h.codelet.arity)
    throw BadSlot("slot out of range for head arity");
  if (h.kind == ConceptKind::ActuatorAtom && slot != 0)
    throw BadSlot("actuator atoms accept slot 0 only");
  // Acyclic by construction: edges point from older to strictly newer, lower
  // to strictly higher level.
  if (h.created_at < t.created_at || h.level <= t.level)
    throw BadSlot("edges must point from lower level to later-created higher level");

  std::vector<Action>& list = actions_[tail];
  if (list.size() >= params_.max_actions_per_tail) {
    auto victim = std::min_element(list.begin(), list.end(),
                                   [](const Action& a, const Action& b) {
                                     if (a.q != b.q) return a.q < b.q;
                                     return a.created_at < b.created_at;
                                   });
    list.erase(victim);
  }
  list.push_back(Action{tail, head, slot, params_.q_init, tick_, std::nullopt});
}

const std::vector<Action>& Depository::actions_of(ConceptId tail) const {
  static const std::vector<Action> kEmpty;
  auto it = actions_.find(tail);
  return it == actions_.end() ? kEmpty : it->second;
}

std::vector<const Action*> Depository::all_actions() const {
  std::vector<const Action*> out;
  for (const auto& [tail, list] : actions_)
    for (const Action& a : list) out.push_back(&a);
  return out;
}

std::size_t Depository::action_count() const {
  std::size_t n = 0;
  for (const auto& [tail, list] : actions_) n += list.size();
  return n;
}

std::size_t Depository::incoming_count(ConceptId head) const {
  std::size_t n = 0;
  for (const auto& [tail, list] : actions_)
    for (const Action& a : list)
      if (a.head == head) ++n;
  return n;
}

double Depository::sum_q(ConceptId tail) const {
  double s = 0.0;
  for (const Action& a : actions_of(tail)) s += a.q;
  return s;
}

std::optional<Action> Depository::select_action(ConceptId tail,
                                                std::uint64_t& rng_state) const {
  const std::vector<Action>& list = actions_of(tail);
  if (list.empty()) return std::nullopt;
  double total = 0.0;
  for (const Action& a : list) total += a.q;
  const double u = rng_unit(rng_state) * total;
  double acc = 0.0;
  for (const Action& a : list) {
    acc += a.q;
    if (u < acc) return a;
  }
  return list.back();
}

bool Depository::gather_inputs(const Concept& head,
                               std::vector<FeatureVector>& inputs) const {
  const std::uint16_t arity =
      head.kind == ConceptKind::CodeletNode ? head.codelet.arity : 1;
  inputs.assign(arity, {});
  for (std::uint16_t s = 0; s < arity; ++s) {
    ConceptId best = 0;
    bool found = false;
    for (const auto& [tail, list] : actions_) {
      for (const Action& a : list) {
        if (a.head != head.id || a.slot != s) continue;
        const Concept& t = concept_ref(a.tail);
        if (!t.last_output || t.last_output->second != tick_) continue;
        if (!found || a.tail < best) {
          best = a.tail;
          found = true;
        }
      }
    }
    if (!found) return false;
    inputs[s] = concept_ref(best).last_output->first;
  }
  return true;
}

namespace {

struct ExecRequest {
  ConceptId tail;
  ConceptId head;
  std::uint16_t slot;
  std::uint64_t action_created_at;
  std::vector<FeatureVector> inputs;
};

}  // namespace

TickReport Depository::tick(const std::vector<FeatureVector>& frame, unsigned workers) {
  if (!engine_params_ok(params_)) throw DomainError("bad EngineParams");
  ++tick_;
  TickReport rep;
  rep.tick = tick_;

  std::uint32_t max_level = 0;
  for (auto& [id, c] : concepts_) {
    max_level = std::max(max_level, c.level);
    if (c.kind != ConceptKind::SensoryAtom) continue;
    if (c.channel >= frame.size())
      throw MissingChannel("frame lacks channel " + std::to_string(c.channel));
    if (!feature_vector_ok(frame[c.channel]))
      throw DomainError("frame vector too long");
    c.last_output = {frame[c.channel], tick_};
  }

  std::unordered_set<ConceptId> executed;

  for (std::uint32_t level = 0; level <= max_level; ++level) {
    std::vector<ConceptId> fresh;
    for (auto& [id, c] : concepts_)
      if (c.level == level && c.last_output && c.last_output->second == tick_)
        fresh.push_back(id);
    if (fresh.empty()) continue;

    std::vector<ExecRequest> requests;
    for (ConceptId id : fresh) {
      Concept& c = concept_ref(id);
      if (c.kind == ConceptKind::ActuatorAtom) continue;

      if (params_.explore) {
        const double p_exp = exploration_probability(params_.q_const, sum_q(id));
        if (rng_unit(rng_) < p_exp) {
          GenParams gp;
          gp.min_len = params_.gen_min_len;
          gp.max_len = params_.gen_max_len;
          gp.arity = 1;
          Codelet code = generate(gp, rng_);
          ConceptId nid = add_codelet_concept(std::move(code), c.level + 1);
          max_level = std::max(max_level, c.level + 1);
          add_action(id, nid, 0);
          ++rep.explorations;
          ++rep.concepts_added;
          ++rep.actions_added;
        }
      }

      std::optional<Action> sel = select_action(id, rng_);
      if (!sel) continue;
      if (executed.count(sel->head)) continue;
      const Concept& head = concept_ref(sel->head);
      if (head.kind != ConceptKind::CodeletNode) continue;  // actuators are inert
      std::vector<FeatureVector> inputs;
      if (!gather_inputs(head, inputs)) continue;
      inputs[sel->slot] = c.last_output->first;  // the selecting tail feeds its slot
      executed.insert(sel->head);
      requests.push_back({id, sel->head, sel->slot, sel->created_at, std::move(inputs)});
    }

    // Execution phase: pure reads of immutable codelets and gathered inputs.
    std::vector<ExecOutcome> results(requests.size());
    auto run_range = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const Concept& head = concept_ref(requests[i].head);
        results[i] = execute(head.codelet, requests[i].inputs, params_.fuel);
      }
    };
    if (workers <= 1 || requests.size() < 2) {
      run_range(0, requests.size());
    } else {
      const std::size_t n = requests.size();
      const unsigned nthreads = std::min<std::size_t>(workers, n);
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < nthreads; ++t) {
        std::size_t lo = n * t / nthreads;
        std::size_t hi = n * (t + 1) / nthreads;
        pool.emplace_back(run_range, lo, hi);
      }
      for (auto& th : pool) th.join();
    }

    // Commit phase: serialized, request order.
    for (std::size_t i = 0; i < requests.size(); ++i) {
      const ExecRequest& req = requests[i];
      ExecOutcome& outcome = results[i];
      Concept& head = concept_ref(req.head);
      const bool positive = outcome.kind == OutcomeKind::Positive;
      head.window.record(positive);
      head.timing.record(outcome.steps_used);
      if (positive) head.last_output = {std::move(outcome.output), tick_};
      ++rep.executions;
      if (positive)
        ++rep.positives;
      else if (outcome.kind == OutcomeKind::FuelExhausted)
        ++rep.fuel_exhausted;
      else
        ++rep.negatives;

      const double r =
          effective_reward(intrinsic_reward(head.window.probability()), head.timing);
      rep.reward_sum += r;

      TdInputs in;
      in.reward = r;
      in.alpha = params_.alpha;
      in.gamma = params_.gamma;
      for (const Action& a : actions_of(req.head)) {
        const Concept& succ_head = concept_ref(a.head);
        const double p_j = succ_head.window.empty() ? 0.0 : succ_head.window.probability();
        in.successors.emplace_back(a.q, p_j);
      }

      auto it = actions_.find(req.tail);
      if (it == actions_.end()) continue;
      for (Action& a : it->second) {
        if (a.head != req.head || a.slot != req.slot ||
            a.created_at != req.action_created_at)
          continue;
        in.q = a.q;
        a.q = params_.td_rule == TdRule::Max ? td_update_max(in) : td_update_mean(in);
        break;
      }
    }
  }

  prune(rep);
  return rep;
}

void Depository::prune(TickReport& rep) {
  for (auto& [tail, list] : actions_) {
    for (auto it = list.begin(); it != list.end();) {
      Action& a = *it;
      if (a.q < params_.prune_threshold) {
        if (!a.low_q_since) a.low_q_since = tick_;
        if (tick_ - *a.low_q_since + 1 >= params_.prune_patience) {
          it = list.erase(it);
          ++rep.actions_pruned;
          continue;
        }
      } else {
        a.low_q_since.reset();
      }
      ++it;
    }
  }

  // Drop concepts left unreachable: no incoming action and no sensory role.
  for (bool removed = true; removed;) {
    removed = false;
    std::vector<ConceptId> victims;
    for (const auto& [id, c] : concepts_) {
      if (c.kind == ConceptKind::SensoryAtom) continue;
      if (incoming_count(id) == 0) victims.push_back(id);
    }
    for (ConceptId id : victims) {
      const Concept& c = concept_ref(id);
      const double p = c.window.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : c.window.probability();
      rep.concepts_removed.emplace_back(id, p);
      concepts_.erase(id);
      actions_.erase(id);
      removed = true;
    }
  }
}

// ---------------------------------------------------------------------------
// Snapshot
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'B', 'S', 'P', 'R'};
constexpr std::uint8_t kSnapshotVersion = 1;

struct Writer {
  std::vector<std::uint8_t> out;
  void u8(std::uint8_t v) { out.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

struct Reader {
  const std::vector<std::uint8_t>& in;
  std::size_t pos = 0;
  void need(std::size_t n) const {
    if (pos + n > in.size()) throw CorruptSnapshot("truncated snapshot");
  }
  std::uint8_t u8() {
    need(1);
    return in[pos++];
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(in[pos++]) << (8 * i);
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

}  // namespace

std::vector<std::uint8_t> Depository::snapshot() const {
  Writer w;
  for (char m : kMagic) w.u8(static_cast<std::uint8_t>(m));
  w.u8(kSnapshotVersion);
  w.u64(tick_);
  w.u64(next_id_);
  w.u64(rng_);

  w.f64(params_.alpha);
  w.f64(params_.gamma);
  w.f64(params_.q_const);
  w.f64(params_.q_init);
  w.u32(params_.max_actions_per_tail);
  w.u64(params_.fuel);
  w.f64(params_.prune_threshold);
  w.u64(params_.prune_patience);
  w.u8(static_cast<std::uint8_t>(params_.td_rule));
  w.u8(params_.explore ? 1 : 0);
  w.u32(params_.window_capacity);
  w.f64(params_.timing_decay);
  w.u16(params_.gen_min_len);
  w.u16(params_.gen_max_len);

  w.u64(concepts_.size());
  for (const auto& [id, c] : concepts_) {
    w.u64(c.id);
    w.u8(static_cast<std::uint8_t>(c.kind));
    w.u32(c.channel);
    w.u32(c.level);
    w.u64(c.created_at);
    if (c.kind == ConceptKind::CodeletNode) {
      w.u8(1);
      std::vector<std::uint8_t> bin = to_binary(c.codelet);
      w.u32(static_cast<std::uint32_t>(bin.size()));
      w.out.insert(w.out.end(), bin.begin(), bin.end());
    } else {
      w.u8(0);
    }
    w.u32(static_cast<std::uint32_t>(c.window.capacity()));
    std::vector<bool> contents = c.window.contents();
    w.u32(static_cast<std::uint32_t>(contents.size()));
    for (bool b : contents) w.u8(b ? 1 : 0);
    w.u8(c.timing.any() ? 1 : 0);
    w.f64(c.timing.raw_average());
    w.f64(c.timing.decay());
    if (c.last_output) {
      w.u8(1);
      w.u64(c.last_output->second);
      w.u16(static_cast<std::uint16_t>(c.last_output->first.size()));
      for (std::int16_t v : c.last_output->first)
        w.u16(static_cast<std::uint16_t>(v));
    } else {
      w.u8(0);
    }
  }

  w.u64(action_count());
  for (const auto& [tail, list] : actions_) {
    for (const Action& a : list) {
      w.u64(a.tail);
      w.u64(a.head);
      w.u16(a.slot);
      w.f64(a.q);
      w.u64(a.created_at);
      w.u8(a.low_q_since ? 1 : 0);
      w.u64(a.low_q_since.value_or(0));
    }
  }
  return w.out;
}

Depository Depository::restore(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  for (char m : kMagic)
    if (r.u8() != static_cast<std::uint8_t>(m))
      throw CorruptSnapshot("bad magic");
  const std::uint8_t version = r.u8();
  if (version != kSnapshotVersion)
    throw VersionMismatch("snapshot version " + std::to_string(version));

  Depository d;
  d.tick_ = r.u64();
  d.next_id_ = r.u64();
  d.rng_ = r.u64();

  EngineParams p;
  p.alpha = r.f64();
  p.gamma = r.f64();
  p.q_const = r.f64();
  p.q_init = r.f64();
  p.max_actions_per_tail = r.u32();
  p.fuel = r.u64();
  p.prune_threshold = r.f64();
  p.prune_patience = r.u64();
  p.td_rule = static_cast<TdRule>(r.u8());
  p.explore = r.u8() != 0;
  p.window_capacity = r.u32();
  p.timing_decay = r.f64();
  p.gen_min_len = r.u16();
  p.gen_max_len = r.u16();
  if (!engine_params_ok(p)) throw CorruptSnapshot("bad params block");
  d.params_ = p;

  const std::uint64_t n_concepts = r.u64();
  for (std::uint64_t i = 0; i < n_concepts; ++i) {
    Concept c;
    c.id = r.u64();
    c.kind = static_cast<ConceptKind>(r.u8());
    c.channel = r.u32();
    c.level = r.u32();
    c.created_at = r.u64();
    if (r.u8()) {
      const std::uint32_t len = r.u32();
      r.need(len);
      std::vector<std::uint8_t> bin(bytes.begin() + r.pos, bytes.begin() + r.pos + len);
      r.pos += len;
      try {
        c.codelet = from_binary(bin);
      } catch (const InvalidCodelet& e) {
        throw CorruptSnapshot(e.what());
      }
    }
    const std::uint32_t capacity = r.u32();
    const std::uint32_t size = r.u32();
    if (capacity == 0 || size > capacity) throw CorruptSnapshot("bad window block");
    c.window = OutcomeWindow(capacity);
    for (std::uint32_t k = 0; k < size; ++k) c.window.record(r.u8() != 0);
    const bool timing_any = r.u8() != 0;
    const double avg = r.f64();
    const double decay = r.f64();
    if (!(decay > 0.0 && decay < 1.0)) throw CorruptSnapshot("bad timing block");
    c.timing = TimingStats(decay);
    c.timing.restore(timing_any, avg);
    if (r.u8()) {
      const std::uint64_t stamp = r.u64();
      const std::uint16_t len = r.u16();
      if (len > kMaxVecLen) throw CorruptSnapshot("bad output vector");
      FeatureVector v(len);
      for (auto& x : v) x = static_cast<std::int16_t>(r.u16());
      c.last_output = {std::move(v), stamp};
    }
    ConceptId id = c.id;
    d.concepts_.emplace(id, std::move(c));
  }

  const std::uint64_t n_actions = r.u64();
  for (std::uint64_t i = 0; i < n_actions; ++i) {
    Action a;
    a.tail = r.u64();
    a.head = r.u64();
    a.slot = r.u16();
    a.q = r.f64();
    a.created_at = r.u64();
    const bool has_low = r.u8() != 0;
    const std::uint64_t low = r.u64();
    if (has_low) a.low_q_since = low;
    if (!d.concepts_.count(a.tail) || !d.concepts_.count(a.head))
      throw CorruptSnapshot("dangling action endpoint");
    d.actions_[a.tail].push_back(a);
  }
  if (r.pos != bytes.size()) throw CorruptSnapshot("trailing bytes");
  return d;
}

}  // namespace bspre
