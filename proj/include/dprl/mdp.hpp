#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dprl/rng.hpp"

namespace dprl {

enum class CostNoise { kBernoulli, kDeterministic };

std::string to_string(CostNoise noise);
CostNoise cost_noise_from_string(const std::string& name);

// Finite-horizon tabular MDP with non-stationary transitions and mean
// costs in [0,1]. Step indices h are 0-based and run over [0, horizon).
// Instances are treated as immutable once validated.
struct MdpSpec {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int initial_state = 0;
  CostNoise cost_noise = CostNoise::kBernoulli;
  std::vector<double> transitions;  // [h][s][a][s'], each (h,s,a) row a distribution
  std::vector<double> mean_costs;   // [h][s][a]

  std::size_t cost_index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
  }
  std::size_t trans_index(int h, int s, int a, int s2) const {
    return cost_index(h, s, a) * num_states + s2;
  }

  double transition(int h, int s, int a, int s2) const {
    return transitions[trans_index(h, s, a, s2)];
  }
  double& transition(int h, int s, int a, int s2) {
    return transitions[trans_index(h, s, a, s2)];
  }
  double mean_cost(int h, int s, int a) const { return mean_costs[cost_index(h, s, a)]; }
  double& mean_cost(int h, int s, int a) { return mean_costs[cost_index(h, s, a)]; }

  std::span<const double> transition_row(int h, int s, int a) const {
    return {transitions.data() + trans_index(h, s, a, 0),
            static_cast<std::size_t>(num_states)};
  }

  // Zero-filled spec of the given shape; caller fills rows and validates.
  static MdpSpec with_dims(int num_states, int num_actions, int horizon,
                           int initial_state = 0);

  // Throws std::invalid_argument on shape mismatches, costs outside [0,1],
  // negative probabilities or rows not summing to 1 (tolerance 1e-9).
  void validate() const;
};

// Chain environment: action 0 moves deterministically left, action 1 tries
// to move right against the current. States are 0 (leftmost, small cost
// relief for staying) to num_states-1 (rightmost, zero cost when pushing
// right). All other cells cost cost_default.
struct RiverSwimParams {
  int num_states = 6;
  int horizon = 20;
  // Right action from interior states: (back, stay, forward).
  double right_back = 0.1;
  double right_stay = 0.6;
  double right_forward = 0.3;
  // Right action at the end states.
  double leftmost_stay = 0.7;
  double leftmost_forward = 0.3;
  double rightmost_stay = 0.6;
  double rightmost_back = 0.4;
  double cost_left_at_leftmost = 0.995;
  double cost_right_at_rightmost = 0.0;
  double cost_default = 1.0;
  CostNoise cost_noise = CostNoise::kBernoulli;
};

MdpSpec build_riverswim(const RiverSwimParams& params = {});

struct TrajectoryStep {
  int state = 0;
  int action = 0;
  double cost = 0.0;
  int next_state = 0;
};

// One episode; length equals the horizon, step h holds (s_h, a_h, c_h, s_{h+1}).
using Trajectory = std::vector<TrajectoryStep>;

// Stochastic Markov policy pi_h(a|s); rows are distributions over actions.
struct PolicyTable {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> probs;  // [h][s][a]

  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
  }
  double prob(int h, int s, int a) const { return probs[index(h, s, a)]; }
  double& prob(int h, int s, int a) { return probs[index(h, s, a)]; }
  std::span<const double> row(int h, int s) const {
    return {probs.data() + index(h, s, 0), static_cast<std::size_t>(num_actions)};
  }

  static PolicyTable uniform(int horizon, int num_states, int num_actions);

  // Throws std::invalid_argument when a row is not a distribution.
  void validate() const;
};

// State values V_h(s) for h in [0, horizon]; the terminal row is zero.
struct ValueTable {
  int horizon = 0;
  int num_states = 0;
  std::vector<double> values;  // [(horizon+1)][s]

  double value(int h, int s) const {
    return values[static_cast<std::size_t>(h) * num_states + s];
  }
  double& value(int h, int s) {
    return values[static_cast<std::size_t>(h) * num_states + s];
  }

  static ValueTable zeros(int horizon, int num_states);
};

struct QTable {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> values;  // [h][s][a]

  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
  }
  double value(int h, int s, int a) const { return values[index(h, s, a)]; }
  double& value(int h, int s, int a) { return values[index(h, s, a)]; }

  static QTable zeros(int horizon, int num_states, int num_actions);
};

struct StepResult {
  double cost = 0.0;
  int next_state = 0;
};

// Samples one transition and one cost realization. Bernoulli cost noise
// draws cost first, then the next state. Throws std::invalid_argument on
// out-of-range state, action or step index.
StepResult step(const MdpSpec& mdp, int state, int action, int h, Rng& rng);

// Plays one episode from mdp.initial_state under the policy.
Trajectory rollout(const MdpSpec& mdp, const PolicyTable& policy, Rng& rng);

// Exact V^pi by backward induction over mean costs (no sampling).
ValueTable exact_policy_value(const MdpSpec& mdp, const PolicyTable& policy);

struct OptimalSolution {
  ValueTable values;
  PolicyTable policy;  // deterministic, ties broken toward the smaller action
};

// Exact V* and an optimal deterministic policy by backward induction.
OptimalSolution optimal_values(const MdpSpec& mdp);

// JSON document I/O. Documents carry S, A, H, initial_state, cost_noise and
// nested [h][s][a](s') arrays; loaders validate before returning.
MdpSpec mdp_from_json_text(const std::string& text);
std::string mdp_to_json_text(const MdpSpec& mdp);
MdpSpec load_mdp(const std::string& path);
void save_mdp(const MdpSpec& mdp, const std::string& path);

struct EnvDims {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
};

// Rollout capability handed to learning algorithms. Learners interact with
// the environment only through this interface and never see the true model.
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual EnvDims dims() const = 0;
  virtual Trajectory rollout(const PolicyTable& policy) = 0;
};

class SimulatedEnv final : public RolloutEnv {
 public:
  SimulatedEnv(MdpSpec mdp, std::uint64_t seed)
      : mdp_(std::move(mdp)), rng_(seed) {
    mdp_.validate();
  }

  EnvDims dims() const override {
    return {mdp_.num_states, mdp_.num_actions, mdp_.horizon};
  }
  Trajectory rollout(const PolicyTable& policy) override {
    return dprl::rollout(mdp_, policy, rng_);
  }

  const MdpSpec& mdp() const { return mdp_; }

 private:
  MdpSpec mdp_;
  Rng rng_;
};

}  // namespace dprl
