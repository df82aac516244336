#include <cmath>

#include "doctest.h"
#include "dprl/statistics.hpp"
#include "support.hpp"

using namespace dprl;

TEST_SUITE_BEGIN("statistics");

namespace {

Trajectory fixed_trajectory() {
  // 2 states, 2 actions, horizon 3.
  return {{0, 1, 1.0, 1}, {1, 0, 0.0, 1}, {1, 1, 1.0, 0}};
}

}  // namespace

TEST_CASE("accumulate counts one episode per cell") {
  VisitStatistics stats = VisitStatistics::zeros(3, 2, 2);
  accumulate(stats, fixed_trajectory());
  CHECK(stats.episodes == 1);
  CHECK(stats.visit(0, 0, 1) == 1);
  CHECK(stats.cost_sum(0, 0, 1) == 1.0);
  CHECK(stats.transition(0, 0, 1, 1) == 1);
  CHECK(stats.visit(1, 1, 0) == 1);
  CHECK(stats.cost_sum(1, 1, 0) == 0.0);
  CHECK(stats.transition(1, 1, 0, 1) == 1);
  CHECK(stats.visit(2, 1, 1) == 1);
  CHECK(stats.transition(2, 1, 1, 0) == 1);
  // Untouched cells stay zero.
  CHECK(stats.visit(0, 1, 0) == 0);
  CHECK(stats.transition(0, 0, 1, 0) == 0);

  accumulate(stats, fixed_trajectory());
  CHECK(stats.episodes == 2);
  CHECK(stats.visit(0, 0, 1) == 2);
  CHECK(stats.cost_sum(0, 0, 1) == 2.0);
  CHECK(stats.transition(0, 0, 1, 1) == 2);
}

TEST_CASE("accumulate preserves per-step totals") {
  const MdpSpec mdp = testutil::make_random_mdp(3, 2, 4, 17, CostNoise::kBernoulli);
  const PolicyTable policy = testutil::make_random_policy(4, 3, 2, 18);
  Rng rng(19);
  VisitStatistics stats = VisitStatistics::zeros(4, 3, 2);
  const int episodes = 50;
  for (int k = 0; k < episodes; ++k) {
    accumulate(stats, rollout(mdp, policy, rng));
  }
  CHECK(stats.episodes == episodes);
  for (int h = 0; h < 4; ++h) {
    std::int64_t visits = 0;
    std::int64_t transitions = 0;
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        visits += stats.visit(h, s, a);
        for (int s2 = 0; s2 < 3; ++s2) {
          transitions += stats.transition(h, s, a, s2);
        }
        CHECK(stats.cost_sum(h, s, a) >= 0.0);
        CHECK(stats.cost_sum(h, s, a) <= static_cast<double>(stats.visit(h, s, a)));
      }
    }
    CHECK(visits == episodes);
    CHECK(transitions == episodes);
  }
}

TEST_CASE("accumulate rejects malformed trajectories") {
  VisitStatistics stats = VisitStatistics::zeros(3, 2, 2);
  Trajectory bad = fixed_trajectory();
  bad.pop_back();
  CHECK_THROWS_AS(accumulate(stats, bad), std::invalid_argument);
  Trajectory out_of_range = fixed_trajectory();
  out_of_range[1].state = 2;
  CHECK_THROWS_AS(accumulate(stats, out_of_range), std::invalid_argument);
}

TEST_CASE("private_estimates closed forms") {
  PrivateCounts counts = PrivateCounts::zeros(1, 1, 1);
  SUBCASE("no data yields zero estimates") {
    const PrivateEstimates est = private_estimates(counts, {0.0, 0.0});
    CHECK(est.mean_cost(0, 0, 0) == 0.0);
    CHECK(est.transition(0, 0, 0, 0) == 0.0);
  }
  SUBCASE("exact counts divide through") {
    counts.visits[0] = 10.0;
    counts.cost_sums[0] = 5.0;
    counts.transitions[0] = 10.0;
    const PrivateEstimates est = private_estimates(counts, {0.0, 0.0});
    CHECK(est.mean_cost(0, 0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(est.transition(0, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("the precision level inflates the denominator") {
    counts.visits[0] = 10.0;
    counts.cost_sums[0] = 5.0;
    const PrivateEstimates est = private_estimates(counts, {2.0, 0.0});
    CHECK(est.mean_cost(0, 0, 0) == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  }
  SUBCASE("negative numerators clamp to zero") {
    counts.visits[0] = 4.0;
    counts.cost_sums[0] = -3.0;
    counts.transitions[0] = -1.5;
    const PrivateEstimates est = private_estimates(counts, {1.0, 1.0});
    CHECK(est.mean_cost(0, 0, 0) == 0.0);
    CHECK(est.transition(0, 0, 0, 0) == 0.0);
  }
  SUBCASE("denominator never drops below one") {
    counts.visits[0] = -1e18;
    counts.cost_sums[0] = 0.5;
    const PrivateEstimates est = private_estimates(counts, {0.0, 0.0});
    CHECK(est.mean_cost(0, 0, 0) == 0.5);
    CHECK(std::isfinite(est.mean_cost(0, 0, 0)));
  }
}

TEST_CASE("private_estimates with exact counts equals empirical frequencies") {
  const MdpSpec mdp = testutil::make_random_mdp(3, 2, 3, 7, CostNoise::kBernoulli);
  const PolicyTable policy = testutil::make_random_policy(3, 3, 2, 8);
  Rng rng(9);
  VisitStatistics stats = VisitStatistics::zeros(3, 3, 2);
  for (int k = 0; k < 40; ++k) {
    accumulate(stats, rollout(mdp, policy, rng));
  }
  PrivateCounts counts = PrivateCounts::zeros(3, 3, 2);
  for (std::size_t i = 0; i < counts.visits.size(); ++i) {
    counts.visits[i] = static_cast<double>(stats.visits[i]);
    counts.cost_sums[i] = stats.cost_sums[i];
  }
  for (std::size_t j = 0; j < counts.transitions.size(); ++j) {
    counts.transitions[j] = static_cast<double>(stats.transitions[j]);
  }
  const PrivateEstimates est = private_estimates(counts, {0.0, 0.0});
  for (int h = 0; h < 3; ++h) {
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        const double n = static_cast<double>(stats.visit(h, s, a));
        const double expected_cost =
            n > 0 ? stats.cost_sum(h, s, a) / n : 0.0;
        CHECK(est.mean_cost(h, s, a) == doctest::Approx(expected_cost).epsilon(1e-12));
        double row_sum = 0.0;
        for (int s2 = 0; s2 < 3; ++s2) {
          const double expected_p =
              n > 0 ? static_cast<double>(stats.transition(h, s, a, s2)) / n : 0.0;
          CHECK(est.transition(h, s, a, s2) ==
                doctest::Approx(expected_p).epsilon(1e-12));
          row_sum += est.transition(h, s, a, s2);
        }
        CHECK(row_sum <= 1.0 + 1e-12);  // exact counts keep rows subnormalized
      }
    }
  }
}

TEST_CASE("log_constants closed forms") {
  SUBCASE("cost constant collapses to 2") {
    // 4*S*A*T/delta = e^2 when S = A = T = 1 and delta = 4/e^2.
    const LogConstants consts = log_constants(1, 1, 1, 4.0 * std::exp(-2.0));
    CHECK(consts.l_cost == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("transition constant collapses to 2") {
    // 6*S*A*T/delta = e when S = A = T = 1 and delta = 6/e; the function
    // accepts delta above 1 so the closed form stays reachable.
    const LogConstants consts = log_constants(1, 1, 1, 6.0 * std::exp(-1.0));
    CHECK(consts.l_trans == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(consts.l_prime == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("large-scale value") {
    const LogConstants consts = log_constants(6, 2, 400000, 0.1);
    CHECK(consts.l_prime == doctest::Approx(19.4785).epsilon(1e-3));
    CHECK(consts.l_prime == doctest::Approx(std::log(2.88e8)).epsilon(1e-12));
  }
  SUBCASE("invalid inputs throw") {
    CHECK_THROWS_AS(log_constants(0, 1, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(log_constants(1, 0, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(log_constants(1, 1, 0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(log_constants(1, 1, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(log_constants(1, 1, 1, -0.5), std::invalid_argument);
  }
}

TEST_CASE("bonus closed forms") {
  const double l_cost = 1.7;
  const double l_trans = 2.3;
  SUBCASE("cost bonus") {
    CHECK(bonus_cost(4.0, {0.0, 0.0}, l_cost) ==
          doctest::Approx(l_cost / 2.0).epsilon(1e-15));
    // Count cancelling the precision level floors the denominator at 1.
    CHECK(bonus_cost(-2.0, {2.0, 0.0}, l_cost) ==
          doctest::Approx(l_cost + 6.0).epsilon(1e-15));
    CHECK(bonus_cost(99.0, {1.0, 0.0}, l_cost) ==
          doctest::Approx(l_cost / 10.0 + 0.03).epsilon(1e-15));
  }
  SUBCASE("transition bonus") {
    CHECK(bonus_transition(1.0, {0.0, 0.0}, l_trans, 4) ==
          doctest::Approx(l_trans).epsilon(1e-15));
    CHECK(bonus_transition(99.0, {1.0, 1.0}, l_trans, 4) ==
          doctest::Approx(l_trans / 10.0 + 0.06).epsilon(1e-15));
  }
  SUBCASE("value-aware bonus") {
    CHECK(bonus_pv(1.0, {0.0, 0.0}, l_cost, 4, 7) ==
          doctest::Approx(7.0 * l_cost).epsilon(1e-15));
    // With S*e2 = e1 the horizon-1 variant matches the cost bonus shape.
    const PrecisionLevels prec{0.5, 0.125};
    CHECK(bonus_pv(10.0, prec, l_cost, 4, 1) ==
          doctest::Approx(bonus_cost(10.0, prec, l_cost)).epsilon(1e-14));
    CHECK(bonus_pv(24.0, {1.0, 0.5}, l_cost, 6, 20) ==
          doctest::Approx(20.0 * l_cost / 5.0 + 4.0).epsilon(1e-13));
  }
}

TEST_CASE("bonuses shrink with counts and bound their noise components") {
  // Raising e1 inflates the shared denominator as well, so the bonuses are
  // not monotone in it; what must hold is that each bonus dominates both of
  // its summands and grows with e2 (which enters only the numerator).
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    const double l_cost = 0.5 + 4.0 * rng.uniform01();
    const double l_trans = 0.5 + 4.0 * rng.uniform01();
    const double n = 50.0 * rng.uniform01();
    const double e1 = 3.0 * rng.uniform01();
    const double e2 = 3.0 * rng.uniform01();
    const int S = 2 + static_cast<int>(4.0 * rng.uniform01());
    const int H = 1 + static_cast<int>(6.0 * rng.uniform01());
    const PrecisionLevels prec{e1, e2};
    const PrecisionLevels larger_e2{e1, e2 + 0.5};

    CHECK(bonus_cost(n + 1.0, prec, l_cost) <= bonus_cost(n, prec, l_cost) + 1e-12);
    CHECK(bonus_transition(n + 1.0, prec, l_trans, S) <=
          bonus_transition(n, prec, l_trans, S) + 1e-12);
    CHECK(bonus_pv(n + 1.0, prec, l_cost, S, H) <=
          bonus_pv(n, prec, l_cost, S, H) + 1e-12);

    CHECK(bonus_transition(n, larger_e2, l_trans, S) + 1e-12 >=
          bonus_transition(n, prec, l_trans, S));
    CHECK(bonus_pv(n, larger_e2, l_cost, S, H) + 1e-12 >=
          bonus_pv(n, prec, l_cost, S, H));

    const double d = count_denominator(n, prec);
    CHECK(bonus_cost(n, prec, l_cost) + 1e-12 >= l_cost / std::sqrt(d));
    CHECK(bonus_cost(n, prec, l_cost) + 1e-12 >= 3.0 * e1 / d);
    CHECK(bonus_transition(n, prec, l_trans, S) + 1e-12 >=
          (S * e2 + 2.0 * e1) / d);
    CHECK(bonus_pv(n, prec, l_cost, S, H) + 1e-12 >=
          H * (S * e2 + 2.0 * e1) / d);

    CHECK(bonus_cost(n, prec, l_cost) > 0.0);
    CHECK(std::isfinite(bonus_pv(-1e18, prec, l_cost, S, H)));
  }
}

TEST_CASE("compute_bonuses matches the scalar functions") {
  PrivateCounts counts = PrivateCounts::zeros(2, 2, 2);
  Rng rng(66);
  for (double& v : counts.visits) v = 20.0 * rng.uniform01() - 2.0;
  const PrecisionLevels prec{0.7, 0.3};
  const LogConstants consts = log_constants(2, 2, 64, 0.1);
  const BonusTables tables = compute_bonuses(counts, prec, consts);
  for (int h = 0; h < 2; ++h) {
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        const std::size_t cell = counts.cell_index(h, s, a);
        const double n = counts.visits[cell];
        CHECK(tables.cost[cell] == bonus_cost(n, prec, consts.l_cost));
        CHECK(tables.transition[cell] ==
              bonus_transition(n, prec, consts.l_trans, 2));
        CHECK(tables.pv[cell] == bonus_pv(n, prec, consts.l_cost, 2, 2));
      }
    }
  }
}

TEST_SUITE_END();
