#include "bspre/learning.hpp"

#include <algorithm>

namespace bspre {

namespace {
void check_rates(const TdInputs& in) {
  if (!(in.alpha > 0.0 && in.alpha < 1.0)) throw DomainError("alpha outside (0,1)");
  if (!(in.gamma > 0.0 && in.gamma < 1.0)) throw DomainError("gamma outside (0,1)");
}
}  // namespace

double td_update_max(const TdInputs& in) {
  check_rates(in);
  double boot = 0.0;
  for (const auto& [q, p] : in.successors) boot = std::max(boot, q);
  const double updated = in.q + in.alpha * (in.reward + in.gamma * boot - in.q);
  return std::max(updated, kQMin);
}

double probability_weighted_value(const std::vector<std::pair<double, double>>& successors) {
  double num = 0.0, den = 0.0;
  for (const auto& [q, p] : successors) {
    num += p * q;
    den += p;
  }
  return den > 0.0 ? num / den : 0.0;
}

double td_update_mean(const TdInputs& in) {
  check_rates(in);
  const double boot = probability_weighted_value(in.successors);
  const double updated = in.q + in.alpha * (in.reward + in.gamma * boot - in.q);
  return std::max(updated, kQMin);
}

double selection_probability(const std::vector<double>& qs, std::size_t i) {
  if (qs.empty()) throw EmptyActionSet("no actions to select from");
  if (i >= qs.size()) throw DomainError("action index out of range");
  double sum = 0.0;
  for (double q : qs) {
    if (!(q >= kQMin)) throw DomainError("action value below Q_MIN");
    sum += q;
  }
  return qs[i] / sum;
}

double exploration_probability(double q_const, double sum_q) {
  if (!(q_const > 0.0)) throw DomainError("q_const must be > 0");
  if (!(sum_q >= 0.0)) throw DomainError("sum_q must be >= 0");
  return q_const / (q_const + sum_q);
}

}  // namespace bspre
