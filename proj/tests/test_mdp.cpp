#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dprl/mdp.hpp"
#include "support.hpp"

using namespace dprl;

TEST_SUITE_BEGIN("mdp");

TEST_CASE("riverswim default shape and rows") {
  const MdpSpec mdp = build_riverswim();
  CHECK(mdp.num_states == 6);
  CHECK(mdp.num_actions == 2);
  CHECK(mdp.horizon == 20);
  CHECK(mdp.initial_state == 0);
  mdp.validate();

  for (int h = 0; h < mdp.horizon; ++h) {
    // Left is deterministic: one step toward state 0, staying at 0.
    CHECK(mdp.transition(h, 0, 0, 0) == 1.0);
    for (int s = 1; s < 6; ++s) {
      CHECK(mdp.transition(h, s, 0, s - 1) == 1.0);
    }
    // Right from an interior state follows the (back, stay, forward) triple.
    CHECK(mdp.transition(h, 3, 1, 2) == doctest::Approx(0.1));
    CHECK(mdp.transition(h, 3, 1, 3) == doctest::Approx(0.6));
    CHECK(mdp.transition(h, 3, 1, 4) == doctest::Approx(0.3));
    // End states.
    CHECK(mdp.transition(h, 0, 1, 0) == doctest::Approx(0.7));
    CHECK(mdp.transition(h, 0, 1, 1) == doctest::Approx(0.3));
    CHECK(mdp.transition(h, 5, 1, 5) == doctest::Approx(0.6));
    CHECK(mdp.transition(h, 5, 1, 4) == doctest::Approx(0.4));
    // Costs: relief at the two ends, 1 everywhere else.
    CHECK(mdp.mean_cost(h, 0, 0) == doctest::Approx(0.995));
    CHECK(mdp.mean_cost(h, 5, 1) == 0.0);
    CHECK(mdp.mean_cost(h, 2, 0) == 1.0);
    CHECK(mdp.mean_cost(h, 2, 1) == 1.0);
  }
}

TEST_CASE("riverswim degenerate triple pins the right action") {
  RiverSwimParams params;
  params.right_back = 0.0;
  params.right_stay = 1.0;
  params.right_forward = 0.0;
  const MdpSpec mdp = build_riverswim(params);
  for (int s = 1; s < 5; ++s) {
    CHECK(mdp.transition(0, s, 1, s) == 1.0);
    CHECK(mdp.transition(0, s, 1, s - 1) == 0.0);
    CHECK(mdp.transition(0, s, 1, s + 1) == 0.0);
  }
}

TEST_CASE("riverswim rejects rows that do not sum to 1") {
  RiverSwimParams params;
  params.right_back = 0.1;
  params.right_stay = 0.5;
  params.right_forward = 0.3;
  CHECK_THROWS_AS(build_riverswim(params), std::invalid_argument);
}

TEST_CASE("mdp validation catches malformed specs") {
  MdpSpec mdp = build_riverswim();
  SUBCASE("perturbed transition row") {
    mdp.transition(2, 1, 1, 0) += 1e-6;
    CHECK_THROWS_AS(mdp.validate(), std::invalid_argument);
  }
  SUBCASE("cost above 1") {
    mdp.mean_cost(0, 0, 0) = 1.5;
    CHECK_THROWS_AS(mdp.validate(), std::invalid_argument);
  }
  SUBCASE("initial state out of range") {
    mdp.initial_state = 6;
    CHECK_THROWS_AS(mdp.validate(), std::invalid_argument);
  }
  SUBCASE("negative probability") {
    mdp.transition(0, 1, 1, 0) = -0.1;
    mdp.transition(0, 1, 1, 1) = 0.8;
    CHECK_THROWS_AS(mdp.validate(), std::invalid_argument);
  }
}

TEST_CASE("step samples the declared row and cost model") {
  Rng rng(123);
  MdpSpec mdp = MdpSpec::with_dims(3, 2, 2);
  mdp.cost_noise = CostNoise::kDeterministic;
  for (int h = 0; h < 2; ++h) {
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        mdp.transition(h, s, a, 2) = 1.0;  // everything jumps to state 2
        mdp.mean_cost(h, s, a) = 0.3;
      }
    }
  }
  mdp.validate();

  SUBCASE("deterministic cost and one-hot row") {
    for (int i = 0; i < 50; ++i) {
      const StepResult r = step(mdp, 0, 1, 0, rng);
      CHECK(r.next_state == 2);
      CHECK(r.cost == 0.3);
    }
  }
  SUBCASE("bernoulli cost matches its mean") {
    mdp.cost_noise = CostNoise::kBernoulli;
    mdp.mean_cost(0, 0, 1) = 0.25;
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const StepResult r = step(mdp, 0, 1, 0, rng);
      CHECK((r.cost == 0.0 || r.cost == 1.0));
      sum += r.cost;
    }
    CHECK(sum / n == doctest::Approx(0.25).epsilon(0.008));
  }
  SUBCASE("out of range indices throw") {
    CHECK_THROWS_AS(step(mdp, 3, 0, 0, rng), std::invalid_argument);
    CHECK_THROWS_AS(step(mdp, 0, 2, 0, rng), std::invalid_argument);
    CHECK_THROWS_AS(step(mdp, 0, 0, 2, rng), std::invalid_argument);
    CHECK_THROWS_AS(step(mdp, -1, 0, 0, rng), std::invalid_argument);
  }
}

TEST_CASE("rollout follows deterministic dynamics exactly") {
  // Two-state flip-flop with a single action; the path is forced.
  MdpSpec mdp = MdpSpec::with_dims(2, 1, 4);
  mdp.cost_noise = CostNoise::kDeterministic;
  for (int h = 0; h < 4; ++h) {
    mdp.transition(h, 0, 0, 1) = 1.0;
    mdp.transition(h, 1, 0, 0) = 1.0;
    mdp.mean_cost(h, 0, 0) = 0.25;
    mdp.mean_cost(h, 1, 0) = 0.75;
  }
  mdp.validate();
  Rng rng(9);
  const PolicyTable policy = PolicyTable::uniform(4, 2, 1);
  const Trajectory traj = rollout(mdp, policy, rng);
  REQUIRE(traj.size() == 4);
  CHECK(traj[0].state == 0);
  CHECK(traj[0].next_state == 1);
  CHECK(traj[1].state == 1);
  CHECK(traj[1].next_state == 0);
  CHECK(traj[2].state == 0);
  CHECK(traj[3].state == 1);
  CHECK(traj[0].cost == 0.25);
  CHECK(traj[1].cost == 0.75);
}

TEST_CASE("rollout length one and always-left behavior") {
  RiverSwimParams params;
  params.cost_noise = CostNoise::kDeterministic;
  const MdpSpec mdp = build_riverswim(params);
  PolicyTable left = PolicyTable::uniform(20, 6, 2);
  for (int h = 0; h < 20; ++h) {
    for (int s = 0; s < 6; ++s) {
      left.prob(h, s, 0) = 1.0;
      left.prob(h, s, 1) = 0.0;
    }
  }
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Trajectory traj = rollout(mdp, left, rng);
    REQUIRE(traj.size() == 20);
    for (const TrajectoryStep& st : traj) {
      CHECK(st.state == 0);  // starts at 0 and left keeps it there
      CHECK(st.action == 0);
      CHECK(st.next_state == 0);
      CHECK(st.cost == 0.995);
    }
  }

  RiverSwimParams short_params = params;
  short_params.horizon = 1;
  const MdpSpec short_mdp = build_riverswim(short_params);
  const Trajectory one = rollout(short_mdp, PolicyTable::uniform(1, 6, 2), rng);
  CHECK(one.size() == 1);
}

TEST_CASE("rollout streams are reproducible") {
  const MdpSpec mdp = build_riverswim();
  const PolicyTable policy = testutil::make_random_policy(20, 6, 2, 77);
  Rng a(2024);
  Rng b(2024);
  for (int i = 0; i < 20; ++i) {
    const Trajectory ta = rollout(mdp, policy, a);
    const Trajectory tb = rollout(mdp, policy, b);
    REQUIRE(ta.size() == tb.size());
    for (std::size_t h = 0; h < ta.size(); ++h) {
      CHECK(ta[h].state == tb[h].state);
      CHECK(ta[h].action == tb[h].action);
      CHECK(ta[h].cost == tb[h].cost);
      CHECK(ta[h].next_state == tb[h].next_state);
    }
  }
}

TEST_CASE("exact_policy_value simple closed forms") {
  SUBCASE("single step, constant cost") {
    MdpSpec mdp = MdpSpec::with_dims(2, 2, 1);
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        mdp.transition(0, s, a, s) = 1.0;
        mdp.mean_cost(0, s, a) = 0.3;
      }
    }
    mdp.validate();
    const ValueTable v = exact_policy_value(mdp, PolicyTable::uniform(1, 2, 2));
    CHECK(v.value(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(v.value(1, 0) == 0.0);
  }
  SUBCASE("zero costs give zero value") {
    MdpSpec mdp = testutil::make_random_mdp(3, 2, 3, 5);
    std::fill(mdp.mean_costs.begin(), mdp.mean_costs.end(), 0.0);
    const ValueTable v = exact_policy_value(mdp, PolicyTable::uniform(3, 3, 2));
    for (int h = 0; h <= 3; ++h) {
      for (int s = 0; s < 3; ++s) {
        CHECK(v.value(h, s) == 0.0);
      }
    }
  }
}

TEST_CASE("exact_policy_value matches path enumeration") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const MdpSpec mdp = testutil::make_random_mdp(3, 2, 3, seed);
    for (std::uint64_t pseed : {10u, 11u}) {
      const PolicyTable policy = testutil::make_random_policy(3, 3, 2, pseed);
      const ValueTable v = exact_policy_value(mdp, policy);
      for (int h = 0; h <= 3; ++h) {
        for (int s = 0; s < 3; ++s) {
          CHECK(v.value(h, s) ==
                doctest::Approx(oracle::policy_value_from(mdp, policy, h, s))
                    .epsilon(1e-10));
          CHECK(v.value(h, s) >= 0.0);
          CHECK(v.value(h, s) <= 3 - h + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("optimal_values matches exhaustive policy enumeration") {
  for (std::uint64_t seed : {21u, 22u}) {
    const MdpSpec mdp = testutil::make_random_mdp(3, 2, 3, seed);
    const OptimalSolution sol = optimal_values(mdp);
    for (int h = 0; h <= 3; ++h) {
      for (int s = 0; s < 3; ++s) {
        CHECK(sol.values.value(h, s) ==
              doctest::Approx(oracle::optimal_value_from(mdp, h, s)).epsilon(1e-10));
      }
    }
    // The returned policy attains the optimum.
    const ValueTable v = exact_policy_value(mdp, sol.policy);
    CHECK(v.value(0, mdp.initial_state) ==
          doctest::Approx(sol.values.value(0, mdp.initial_state)).epsilon(1e-12));
  }
}

TEST_CASE("optimal_values dominates arbitrary policies") {
  const MdpSpec mdp = testutil::make_random_mdp(3, 2, 3, 33);
  const OptimalSolution sol = optimal_values(mdp);
  for (std::uint64_t pseed = 0; pseed < 20; ++pseed) {
    const PolicyTable policy = testutil::make_random_policy(3, 3, 2, pseed);
    const ValueTable v = exact_policy_value(mdp, policy);
    for (int h = 0; h <= 3; ++h) {
      for (int s = 0; s < 3; ++s) {
        CHECK(sol.values.value(h, s) <= v.value(h, s) + 1e-12);
      }
    }
  }
}

TEST_CASE("optimal_values single action reduces to policy evaluation") {
  const MdpSpec mdp = testutil::make_random_mdp(3, 1, 3, 44);
  const OptimalSolution sol = optimal_values(mdp);
  const ValueTable v = exact_policy_value(mdp, PolicyTable::uniform(3, 3, 1));
  for (int h = 0; h <= 3; ++h) {
    for (int s = 0; s < 3; ++s) {
      CHECK(sol.values.value(h, s) == doctest::Approx(v.value(h, s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("optimal_values breaks ties toward the smaller action") {
  MdpSpec mdp = MdpSpec::with_dims(2, 2, 2);
  for (int h = 0; h < 2; ++h) {
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        mdp.transition(h, s, a, s) = 1.0;
        mdp.mean_cost(h, s, a) = 0.5;  // both actions identical
      }
    }
  }
  mdp.validate();
  const OptimalSolution sol = optimal_values(mdp);
  for (int h = 0; h < 2; ++h) {
    for (int s = 0; s < 2; ++s) {
      CHECK(sol.policy.prob(h, s, 0) == 1.0);
      CHECK(sol.policy.prob(h, s, 1) == 0.0);
    }
  }
}

TEST_CASE("json round trip preserves every tensor entry") {
  const MdpSpec mdp = build_riverswim();
  const std::string text = mdp_to_json_text(mdp);
  const MdpSpec back = mdp_from_json_text(text);
  CHECK(back.num_states == mdp.num_states);
  CHECK(back.num_actions == mdp.num_actions);
  CHECK(back.horizon == mdp.horizon);
  CHECK(back.initial_state == mdp.initial_state);
  CHECK(back.cost_noise == mdp.cost_noise);
  CHECK(back.transitions == mdp.transitions);
  CHECK(back.mean_costs == mdp.mean_costs);
}

TEST_CASE("json loader rejects malformed documents") {
  CHECK_THROWS_AS(mdp_from_json_text("{ not json"), std::invalid_argument);
  CHECK_THROWS_AS(mdp_from_json_text("{}"), std::invalid_argument);
  CHECK_THROWS_AS(mdp_from_json_text(R"({"num_states": 2, "num_actions": 1,
      "horizon": 1, "transitions": [[[[0.5, 0.4]], [[1.0, 0.0]]]],
      "mean_costs": [[[0.1], [0.2]]]})"),
                  std::invalid_argument);
}

TEST_CASE("mdp file io round trips") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "dprl_test_mdp.json";
  const MdpSpec mdp = testutil::make_random_mdp(4, 2, 3, 99);
  save_mdp(mdp, path.string());
  const MdpSpec back = load_mdp(path.string());
  CHECK(back.transitions == mdp.transitions);
  CHECK(back.mean_costs == mdp.mean_costs);
  fs::remove(path);
  CHECK_THROWS_AS(load_mdp(path.string()), std::runtime_error);
}

TEST_SUITE_END();
