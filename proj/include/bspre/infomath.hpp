#pragma once

#include <cstdint>
#include <vector>

#include "bspre/errors.hpp"

namespace bspre {

// Probability of the positive outcome at which -p*log2(p) peaks: 1/e.
double reward_argmax();

// Surprisal of a positive match: -log2(p). Throws DomainError at p = 0.
double self_information(double p);

// The same quantity computed literally as the Kullback-Leibler distance from
// a Kronecker delta on the positive outcome to the {pos, neg} distribution.
double kl_self_information(double p);

// Averaged self-information gain: -p*log2(p). Continuously extended to 0 at
// p = 0; exactly 0 at p = 1.
double intrinsic_reward(double p);

// Information gained by two independent matches: -log2(pa) - log2(pb).
double combined_information(double p_a, double p_b);

// Reward of the two-step route (partition in sequence).
double sequence_reward(double p_a, double p_b);

// Reward of the one-step route (both partitions fused in one codelet).
double merged_reward(double p_a, double p_b);

// True when the first step alone already out-rewards the fused concept;
// guaranteed whenever p_a < 1/e.
bool first_step_dominates(double p_a, double p_b);

// Ring of the most recent positive/negative outcomes; the windowed estimator
// of P(positive).
class OutcomeWindow {
 public:
  explicit OutcomeWindow(std::size_t capacity = 1000);

  void record(bool positive);
  double probability() const;  // throws EmptyWindow when empty

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }
  std::size_t positives() const { return n_pos_; }
  std::size_t negatives() const { return size_ - n_pos_; }
  bool empty() const { return size_ == 0; }

  // Retained outcomes, oldest first (used by snapshots and recount checks).
  std::vector<bool> contents() const;

 private:
  std::size_t capacity_;
  std::vector<std::uint8_t> ring_;
  std::size_t next_ = 0;  // insertion cursor
  std::size_t size_ = 0;
  std::size_t n_pos_ = 0;
};

// Exponentially-weighted mean of execution step counts, seeded with the
// first observation.
class TimingStats {
 public:
  explicit TimingStats(double decay = 0.99);

  void record(std::uint64_t steps);
  double average() const;  // throws DomainError before any record
  bool any() const { return any_; }
  double decay() const { return decay_; }

  // snapshot support
  double raw_average() const { return avg_; }
  void restore(bool any, double avg);

 private:
  double decay_;
  double avg_ = 0.0;
  bool any_ = false;
};

// The execution-time economics divisor: reward per averaged VM step.
double effective_reward(double reward, const TimingStats& timing);

}  // namespace bspre
