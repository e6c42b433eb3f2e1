#pragma once

#include <utility>
#include <vector>

#include "bspre/errors.hpp"

namespace bspre {

// Floor on stored action values; selection stays a proper distribution.
inline constexpr double kQMin = 1e-6;

struct TdInputs {
  double q;
  double reward;
  double alpha;
  double gamma;
  // (q_j, p_j) over the head concept's outgoing actions; p_j is the windowed
  // positive-outcome probability of action j's head.
  std::vector<std::pair<double, double>> successors;
};

// Q <- Q + alpha * (r + gamma * max_j Q_j - Q); empty successor set
// bootstraps 0. Result clamped to >= kQMin.
double td_update_max(const TdInputs& in);

// Same update with the probability-weighted mean value
// V = sum_j p_j Q_j / sum_j p_j (0 when the weights vanish).
double td_update_mean(const TdInputs& in);

double probability_weighted_value(const std::vector<std::pair<double, double>>& successors);

// P(a_i) = Q_i / sum_j Q_j. Throws EmptyActionSet.
double selection_probability(const std::vector<double>& qs, std::size_t i);

// P_exp = Q_const / (Q_const + sum Q).
double exploration_probability(double q_const, double sum_q);

}  // namespace bspre
