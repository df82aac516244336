#pragma once

// Shared test helpers. The oracle namespace holds independent reference
// implementations (exhaustive enumeration, no backward induction) used to
// pin expected values; keep them free of library internals.

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "dprl/mdp.hpp"
#include "dprl/rng.hpp"

namespace oracle {

// V^pi at (h0, s0): sums path probability times path cost over every
// explicit action/successor sequence of the remaining steps.
inline double policy_value_from(const dprl::MdpSpec& mdp,
                                const dprl::PolicyTable& policy, int h0, int s0) {
  const int steps = mdp.horizon - h0;
  if (steps <= 0) return 0.0;
  std::vector<int> actions(steps, 0);
  std::vector<int> nexts(steps, 0);
  double total = 0.0;
  for (;;) {
    double prob = 1.0;
    double cost = 0.0;
    int s = s0;
    for (int i = 0; i < steps; ++i) {
      const int h = h0 + i;
      const int a = actions[i];
      const int s2 = nexts[i];
      prob *= policy.prob(h, s, a) * mdp.transition(h, s, a, s2);
      cost += mdp.mean_cost(h, s, a);
      s = s2;
    }
    total += prob * cost;
    int i = 0;
    for (; i < steps; ++i) {
      if (++actions[i] < mdp.num_actions) break;
      actions[i] = 0;
      if (++nexts[i] < mdp.num_states) break;
      nexts[i] = 0;
    }
    if (i == steps) break;
  }
  return total;
}

inline double policy_value(const dprl::MdpSpec& mdp, const dprl::PolicyTable& policy) {
  return policy_value_from(mdp, policy, 0, mdp.initial_state);
}

// V* at (h0, s0): enumerates every deterministic time-dependent policy
// (num_actions^(horizon*num_states) of them) and takes the best.
inline double optimal_value_from(const dprl::MdpSpec& mdp, int h0, int s0) {
  const int cells = mdp.horizon * mdp.num_states;
  std::vector<int> assign(cells, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    dprl::PolicyTable policy =
        dprl::PolicyTable::uniform(mdp.horizon, mdp.num_states, mdp.num_actions);
    std::fill(policy.probs.begin(), policy.probs.end(), 0.0);
    for (int h = 0; h < mdp.horizon; ++h) {
      for (int s = 0; s < mdp.num_states; ++s) {
        policy.prob(h, s, assign[h * mdp.num_states + s]) = 1.0;
      }
    }
    best = std::min(best, policy_value_from(mdp, policy, h0, s0));
    int i = 0;
    for (; i < cells; ++i) {
      if (++assign[i] < mdp.num_actions) break;
      assign[i] = 0;
    }
    if (i == cells) break;
  }
  return best;
}

// Greedy left-to-right decomposition of [1, n] into aligned power-of-two
// intervals, taking the longest interval that fits at each position.
inline std::vector<std::pair<std::int64_t, std::int64_t>> greedy_dyadic(
    std::int64_t n) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  std::int64_t lo = 1;
  while (lo <= n) {
    std::int64_t len = 1;
    while (len * 2 <= n - lo + 1 && (lo - 1) % (len * 2) == 0) len *= 2;
    out.emplace_back(lo, lo + len - 1);
    lo += len;
  }
  return out;
}

}  // namespace oracle

namespace testutil {

// Random dense MDP with Bernoulli cost noise disabled (deterministic costs
// keep value checks exact unless a test opts in).
inline dprl::MdpSpec make_random_mdp(int num_states, int num_actions, int horizon,
                                     std::uint64_t seed,
                                     dprl::CostNoise noise = dprl::CostNoise::kDeterministic) {
  dprl::Rng rng(seed);
  dprl::MdpSpec mdp = dprl::MdpSpec::with_dims(num_states, num_actions, horizon);
  mdp.cost_noise = noise;
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < num_actions; ++a) {
        mdp.mean_cost(h, s, a) = rng.uniform01();
        double sum = 0.0;
        for (int s2 = 0; s2 < num_states; ++s2) {
          const double w = 0.05 + rng.uniform01();
          mdp.transition(h, s, a, s2) = w;
          sum += w;
        }
        for (int s2 = 0; s2 < num_states; ++s2) {
          mdp.transition(h, s, a, s2) /= sum;
        }
      }
    }
  }
  mdp.validate();
  return mdp;
}

inline dprl::PolicyTable make_random_policy(int horizon, int num_states,
                                            int num_actions, std::uint64_t seed) {
  dprl::Rng rng(seed);
  dprl::PolicyTable policy = dprl::PolicyTable::uniform(horizon, num_states, num_actions);
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      double sum = 0.0;
      for (int a = 0; a < num_actions; ++a) {
        const double w = 0.05 + rng.uniform01();
        policy.prob(h, s, a) = w;
        sum += w;
      }
      for (int a = 0; a < num_actions; ++a) {
        policy.prob(h, s, a) /= sum;
      }
    }
  }
  return policy;
}

inline double binomial_slack(double p, int n, double z = 2.576) {
  return z * std::sqrt(p * (1.0 - p) / n);  // z = 2.576 is the 99% two-sided point
}

}  // namespace testutil
