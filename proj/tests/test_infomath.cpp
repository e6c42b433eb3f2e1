#include "bspre/infomath.hpp"

#include <cmath>
#include <deque>

#include "bspre/rng.hpp"
#include "doctest.h"

using namespace bspre;

TEST_CASE("self-information of basic probabilities") {
  CHECK(self_information(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(self_information(1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(self_information(0.25) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(self_information(0.0), DomainError);
  CHECK_THROWS_AS(self_information(1.5), DomainError);
}

TEST_CASE("KL form collapses to plain surprisal") {
  CHECK(kl_self_information(0.25) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(kl_self_information(1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(kl_self_information(0.0), DomainError);
  std::uint64_t rng = 7;
  for (int i = 0; i < 10000; ++i) {
    double p = rng_unit(rng);
    if (p == 0.0) continue;
    CHECK(std::fabs(kl_self_information(p) - self_information(p)) < 1e-12);
  }
}

TEST_CASE("intrinsic reward values and extension points") {
  CHECK(intrinsic_reward(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(intrinsic_reward(0.0) == 0.0);
  CHECK(intrinsic_reward(1.0) == 0.0);
  const double e_inv = reward_argmax();
  CHECK(intrinsic_reward(e_inv) == doctest::Approx(0.530737845423).epsilon(1e-9));
  CHECK(intrinsic_reward(14.0 / 25.0) == doctest::Approx(0.46838).epsilon(1e-4));
}

TEST_CASE("combined information is additive") {
  CHECK(combined_information(0.5, 0.25) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(combined_information(1.0, 0.3) ==
        doctest::Approx(self_information(0.3)).epsilon(1e-12));
  CHECK_THROWS_AS(combined_information(0.0, 0.5), DomainError);
  std::uint64_t rng = 11;
  for (int i = 0; i < 10000; ++i) {
    double a = rng_unit(rng), b = rng_unit(rng);
    if (a == 0.0 || b == 0.0) continue;
    CHECK(std::fabs(combined_information(a, b) - self_information(a * b)) < 1e-9);
  }
}

TEST_CASE("sequence vs merged reward") {
  CHECK(sequence_reward(0.25, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sequence_reward(1.0, 1.0) == 0.0);
  const double e_inv = reward_argmax();
  CHECK(sequence_reward(e_inv, e_inv) == doctest::Approx(1.061475).epsilon(1e-5));
  CHECK(merged_reward(0.25, 0.5) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(merged_reward(1.0, 0.3) == doctest::Approx(intrinsic_reward(0.3)).epsilon(1e-12));

  std::uint64_t rng = 13;
  for (int i = 0; i < 10000; ++i) {
    double a = 0.001 + 0.998 * rng_unit(rng);
    double b = 0.001 + 0.998 * rng_unit(rng);
    CHECK(sequence_reward(a, b) > merged_reward(a, b));
  }
}

TEST_CASE("first step dominates below 1/e") {
  const double e_inv = reward_argmax();
  std::uint64_t rng = 17;
  for (int i = 0; i < 5000; ++i) {
    double a = rng_unit(rng) * (e_inv - 1e-9);
    double b = 0.001 + 0.998 * rng_unit(rng);
    if (a <= 0.0) continue;
    CHECK(first_step_dominates(a, b));
  }
  CHECK(first_step_dominates(0.25, 0.9));
  CHECK_FALSE(first_step_dominates(0.5, 0.9));
  CHECK(first_step_dominates(0.5, 0.1));
}

TEST_CASE("reward argmax matches a brute-force grid search") {
  const double e_inv = reward_argmax();
  CHECK(e_inv == doctest::Approx(0.367879441).epsilon(1e-9));
  // coarse grid plus refinement, fully independent of the closed form
  double best_p = 0.0, best_r = -1.0;
  for (int i = 1; i < 100000; ++i) {
    double p = i * 1e-5;
    double r = -p * std::log2(p);
    if (r > best_r) { best_r = r; best_p = p; }
  }
  double lo = best_p - 1e-5, hi = best_p + 1e-5;
  for (int refine = 0; refine < 40; ++refine) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (-m1 * std::log2(m1) < -m2 * std::log2(m2)) lo = m1; else hi = m2;
  }
  double bruteforce = (lo + hi) / 2.0;
  CHECK(std::fabs(bruteforce - e_inv) < 1e-6);
  CHECK(intrinsic_reward(e_inv + 0.01) < intrinsic_reward(e_inv));
  CHECK(intrinsic_reward(e_inv - 0.01) < intrinsic_reward(e_inv));
}

TEST_CASE("intrinsic reward is unimodal around 1/e") {
  const double e_inv = reward_argmax();
  double prev = 0.0;
  for (double p = 1e-4; p < e_inv; p += 1e-4) {
    double r = intrinsic_reward(p);
    CHECK(r > prev);
    prev = r;
  }
  prev = intrinsic_reward(e_inv);
  for (double p = e_inv + 1e-4; p < 1.0; p += 1e-4) {
    double r = intrinsic_reward(p);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("outcome window basics") {
  OutcomeWindow w(1000);
  for (bool b : {true, true, false, true}) w.record(b);
  CHECK(w.positives() == 3);
  CHECK(w.negatives() == 1);
  CHECK(w.probability() == doctest::Approx(0.75));

  OutcomeWindow tiny(1);
  tiny.record(true);
  tiny.record(false);
  CHECK(tiny.size() == 1);
  CHECK(tiny.positives() == 0);
  CHECK(tiny.probability() == 0.0);

  OutcomeWindow empty(10);
  CHECK_THROWS_AS(empty.probability(), EmptyWindow);
}

TEST_CASE("full eviction flushes the window") {
  OutcomeWindow w(1000);
  for (int i = 0; i < 1000; ++i) w.record(true);
  CHECK(w.probability() == 1.0);
  for (int i = 0; i < 1000; ++i) w.record(false);
  CHECK(w.positives() == 0);
  CHECK(w.negatives() == 1000);
  CHECK(w.size() == 1000);
}

TEST_CASE("window matches a brute-force recount on random streams") {
  std::uint64_t rng = 23;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cap = 1 + rng_below(rng, 1000);
    OutcomeWindow w(cap);
    std::deque<bool> oracle;
    const std::size_t len = rng_below(rng, 5000);
    for (std::size_t i = 0; i < len; ++i) {
      bool b = rng_next(rng) & 1;
      w.record(b);
      oracle.push_back(b);
      if (oracle.size() > cap) oracle.pop_front();
    }
    CHECK(w.size() == oracle.size());
    std::size_t pos = 0;
    for (bool b : oracle) pos += b;
    CHECK(w.positives() == pos);
    std::vector<bool> contents = w.contents();
    CHECK(std::equal(contents.begin(), contents.end(), oracle.begin(), oracle.end()));
  }
}

TEST_CASE("timing stats and effective reward") {
  TimingStats t(0.99);
  CHECK_THROWS_AS(t.average(), DomainError);
  CHECK_THROWS_AS(effective_reward(1.0, t), DomainError);
  t.record(10);
  CHECK(t.average() == doctest::Approx(10.0));
  CHECK(effective_reward(0.5, t) == doctest::Approx(0.05));
  TimingStats unit(0.5);
  unit.record(1);
  CHECK(effective_reward(0.37, unit) == doctest::Approx(0.37));

  // linearity in the divisor: 5x the steps, one fifth the effective reward
  TimingStats cheap(0.99), padded(0.99);
  cheap.record(20);
  padded.record(100);
  CHECK(effective_reward(0.5, padded) ==
        doctest::Approx(effective_reward(0.5, cheap) / 5.0));

  // EWMA seeded with the first observation, then decays
  TimingStats e(0.9);
  e.record(100);
  e.record(50);
  CHECK(e.average() == doctest::Approx(0.9 * 100 + 0.1 * 50));
}
