#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "dprl/mdp.hpp"
#include "dprl/privatizer.hpp"
#include "dprl/statistics.hpp"

namespace dprl {

struct AlgoConfig {
  std::int64_t num_episodes = 1;  // K
  int horizon = 1;
  int num_states = 1;
  int num_actions = 1;
  double delta = 0.1;

  // Policy-update step size; <= 0 selects sqrt(2 ln A / (H^2 K)).
  double learning_rate = 0.0;
  // Multiplier on the confidence widths. The theory constants are very
  // conservative at small scale; experiments shrink them uniformly.
  double bonus_scale = 1.0;

  bool record_value_tables = false;   // keep per-episode Q and V in artifacts
  std::ostream* table_dump = nullptr; // per-episode counts/bonus CSV, or null

  double effective_learning_rate() const;
  void validate() const;                      // throws std::invalid_argument
  void validate(const EnvDims& dims) const;   // also checks the env shape
};

// What one episode of a run produces: the policy that was rolled out, the
// resulting trajectory, and optionally the backward-pass tables behind it.
struct EpisodeArtifacts {
  std::int64_t episode = 0;  // 1-based
  PolicyTable policy;
  Trajectory trajectory;
  std::optional<QTable> q_values;
  std::optional<ValueTable> value_estimates;
};

using EpisodeObserver = std::function<void(EpisodeArtifacts&&)>;

// One optimistic policy-evaluation backward pass: plug-in estimates from
// the released counts, minus the combined cost + transition width, with
// per-step clamping to [0, remaining horizon].
struct PoEvaluation {
  QTable q;
  ValueTable v;
};
PoEvaluation po_evaluate(const PrivateCounts& counts, const PrecisionLevels& prec,
                         const PolicyTable& policy, const AlgoConfig& config);

// Multiplicative-weights step on each (h,s) row. Exponents are shifted by
// the row minimum before exponentiation, then renormalized.
PolicyTable po_improve(const PolicyTable& policy, const QTable& q,
                       double learning_rate);

// One optimistic value-iteration backward pass; the returned policy is
// greedy (ties toward the smaller action index).
struct ViBackward {
  QTable q;
  ValueTable v;
  PolicyTable policy;
};
ViBackward vi_backward(const PrivateCounts& counts, const PrecisionLevels& prec,
                       const AlgoConfig& config);

// Full runs: per episode, release counts, run the backward pass, roll out
// the policy, hand the episode to the privatizer, then (for the policy
// optimization variant) take the improvement step.
void run_private_ucb_po(RolloutEnv& env, Privatizer& privatizer,
                        const AlgoConfig& config, const EpisodeObserver& observer);
void run_private_ucb_vi(RolloutEnv& env, Privatizer& privatizer,
                        const AlgoConfig& config, const EpisodeObserver& observer);

std::vector<EpisodeArtifacts> run_private_ucb_po(RolloutEnv& env,
                                                 Privatizer& privatizer,
                                                 const AlgoConfig& config);
std::vector<EpisodeArtifacts> run_private_ucb_vi(RolloutEnv& env,
                                                 Privatizer& privatizer,
                                                 const AlgoConfig& config);

}  // namespace dprl
