#include "bspre/infomath.hpp"

#include <cmath>

namespace bspre {

namespace {
void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0,1]");
}
}  // namespace

double reward_argmax() { return 1.0 / std::exp(1.0); }

double self_information(double p) {
  check_probability(p);
  if (p == 0.0) throw DomainError("self_information undefined at p = 0");
  return -std::log2(p);
}

double kl_self_information(double p) {
  check_probability(p);
  if (p == 0.0) throw DomainError("kl_self_information undefined at p = 0");
  // Kronecker delta on the positive outcome: delta_pos = 1, delta_neg = 0.
  // The negative term is 0 * log2(0 / (1-p)), zero by convention.
  double sum = 0.0;
  const double delta[2] = {1.0, 0.0};
  const double dist[2] = {p, 1.0 - p};
  for (int i = 0; i < 2; ++i) {
    if (delta[i] > 0.0) sum += delta[i] * std::log2(delta[i] / dist[i]);
  }
  return sum;
}

double intrinsic_reward(double p) {
  check_probability(p);
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p);
}

double combined_information(double p_a, double p_b) {
  return self_information(p_a) + self_information(p_b);
}

double sequence_reward(double p_a, double p_b) {
  return intrinsic_reward(p_a) + intrinsic_reward(p_b);
}

double merged_reward(double p_a, double p_b) {
  check_probability(p_a);
  check_probability(p_b);
  return intrinsic_reward(p_a * p_b);
}

bool first_step_dominates(double p_a, double p_b) {
  return intrinsic_reward(p_a) > merged_reward(p_a, p_b);
}

OutcomeWindow::OutcomeWindow(std::size_t capacity)
    : capacity_(capacity), ring_(capacity, 0) {
  if (capacity == 0) throw DomainError("OutcomeWindow capacity must be >= 1");
}

void OutcomeWindow::record(bool positive) {
  if (size_ == capacity_) {
    if (ring_[next_]) --n_pos_;  // evict oldest
  } else {
    ++size_;
  }
  ring_[next_] = positive ? 1 : 0;
  if (positive) ++n_pos_;
  next_ = (next_ + 1) % capacity_;
}

double OutcomeWindow::probability() const {
  if (size_ == 0) throw EmptyWindow("no outcomes recorded");
  return static_cast<double>(n_pos_) / static_cast<double>(size_);
}

std::vector<bool> OutcomeWindow::contents() const {
  std::vector<bool> out;
  out.reserve(size_);
  std::size_t start = (next_ + capacity_ - size_) % capacity_;
  for (std::size_t i = 0; i < size_; ++i)
    out.push_back(ring_[(start + i) % capacity_] != 0);
  return out;
}

TimingStats::TimingStats(double decay) : decay_(decay) {
  if (!(decay > 0.0 && decay < 1.0)) throw DomainError("timing decay outside (0,1)");
}

void TimingStats::record(std::uint64_t steps) {
  const double s = static_cast<double>(steps);
  if (!any_) {
    avg_ = s;
    any_ = true;
  } else {
    avg_ = decay_ * avg_ + (1.0 - decay_) * s;
  }
}

double TimingStats::average() const {
  if (!any_) throw DomainError("no execution time recorded");
  return avg_;
}

void TimingStats::restore(bool any, double avg) {
  any_ = any;
  avg_ = avg;
}

double effective_reward(double reward, const TimingStats& timing) {
  return reward / timing.average();
}

}  // namespace bspre
