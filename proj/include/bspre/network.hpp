#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bspre/codegen.hpp"
#include "bspre/infomath.hpp"
#include "bspre/learning.hpp"
#include "bspre/vm.hpp"

namespace bspre {

using ConceptId = std::uint64_t;

enum class ConceptKind : std::uint8_t { SensoryAtom, CodeletNode, ActuatorAtom };

enum class TdRule : std::uint8_t { Max, Mean };

struct Concept {
  ConceptId id = 0;
  ConceptKind kind = ConceptKind::CodeletNode;
  std::uint32_t channel = 0;  // SensoryAtom only
  std::uint32_t level = 0;    // 0 for sensory roots
  std::uint64_t created_at = 0;
  Codelet codelet;            // CodeletNode only
  OutcomeWindow window;
  TimingStats timing;
  // Most recent positive output and the tick that produced it.
  std::optional<std::pair<FeatureVector, std::uint64_t>> last_output;

  Concept() : window(1000), timing(0.99) {}
};

// Directed edge tail -> head; executing the action means running the head's
// codelet. The value lives here, at the tail.
struct Action {
  ConceptId tail = 0;
  ConceptId head = 0;
  std::uint16_t slot = 0;
  double q = 0.0;
  std::uint64_t created_at = 0;
  std::optional<std::uint64_t> low_q_since;
};

struct EngineParams {
  double alpha = 0.1;
  double gamma = 0.9;
  double q_const = 1.0;
  double q_init = 0.1;
  std::uint32_t max_actions_per_tail = 8;
  std::uint64_t fuel = 512;
  double prune_threshold = 0.01;
  std::uint64_t prune_patience = 200;
  TdRule td_rule = TdRule::Max;
  bool explore = true;
  std::uint32_t window_capacity = 1000;
  double timing_decay = 0.99;
  std::uint16_t gen_min_len = 4;
  std::uint16_t gen_max_len = 16;
};

bool engine_params_ok(const EngineParams& p);

struct TickReport {
  std::uint64_t tick = 0;
  std::uint64_t executions = 0;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
  std::uint64_t fuel_exhausted = 0;
  std::uint64_t explorations = 0;
  std::uint64_t concepts_added = 0;
  std::uint64_t actions_added = 0;
  std::uint64_t actions_pruned = 0;
  double reward_sum = 0.0;
  // (id, window probability at removal); NaN when the window never filled.
  std::vector<std::pair<ConceptId, double>> concepts_removed;
};

// The store of all concepts and actions; the engine's entire mutable state.
class Depository {
 public:
  explicit Depository(EngineParams params = {}, std::uint64_t seed = 0);

  ConceptId add_sensory(std::uint32_t channel);
  ConceptId add_actuator();
  ConceptId add_codelet_concept(Codelet codelet, std::uint32_t level = 1);

  // New edge with q = q_init; when the tail is at capacity the minimum-q
  // action (oldest on ties) is replaced.
  void add_action(ConceptId tail, ConceptId head, std::uint16_t slot);

  // Samples one of the tail's actions with probability Q_i / sum Q_j.
  std::optional<Action> select_action(ConceptId tail, std::uint64_t& rng_state) const;

  // One engine step over a frame of per-channel sensory vectors.
  // workers > 1 runs the codelet executions of each level wave on a thread
  // pool; results are identical to workers == 1.
  TickReport tick(const std::vector<FeatureVector>& frame, unsigned workers = 1);

  std::vector<std::uint8_t> snapshot() const;
  static Depository restore(const std::vector<std::uint8_t>& bytes);

  const std::map<ConceptId, Concept>& concepts() const { return concepts_; }
  const std::vector<Action>& actions_of(ConceptId tail) const;
  std::vector<const Action*> all_actions() const;
  std::size_t action_count() const;
  std::size_t incoming_count(ConceptId head) const;

  std::uint64_t current_tick() const { return tick_; }
  std::uint64_t rng_state() const { return rng_; }
  const EngineParams& params() const { return params_; }
  EngineParams& params() { return params_; }

 private:
  Concept& concept_ref(ConceptId id);
  const Concept& concept_ref(ConceptId id) const;
  ConceptId register_concept(Concept c);
  double sum_q(ConceptId tail) const;
  bool gather_inputs(const Concept& head, std::vector<FeatureVector>& inputs) const;
  void prune(TickReport& report);

  std::map<ConceptId, Concept> concepts_;              // id order == creation order
  std::map<ConceptId, std::vector<Action>> actions_;   // indexed at the tail
  std::uint64_t tick_ = 0;
  std::uint64_t next_id_ = 1;
  std::uint64_t rng_ = 0;
  EngineParams params_;
};

}  // namespace bspre
