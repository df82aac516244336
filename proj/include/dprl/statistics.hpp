#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dprl/mdp.hpp"

namespace dprl {

// Exact per-(h,s,a) visit counts, accumulated cost realizations and
// per-(h,s,a,s') transition counts over completed episodes.
struct VisitStatistics {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::int64_t episodes = 0;
  std::vector<std::int64_t> visits;      // [h][s][a]
  std::vector<double> cost_sums;         // [h][s][a]
  std::vector<std::int64_t> transitions; // [h][s][a][s']

  std::size_t cell_index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
  }
  std::size_t trans_index(int h, int s, int a, int s2) const {
    return cell_index(h, s, a) * num_states + s2;
  }
  std::int64_t visit(int h, int s, int a) const { return visits[cell_index(h, s, a)]; }
  double cost_sum(int h, int s, int a) const { return cost_sums[cell_index(h, s, a)]; }
  std::int64_t transition(int h, int s, int a, int s2) const {
    return transitions[trans_index(h, s, a, s2)];
  }

  static VisitStatistics zeros(int horizon, int num_states, int num_actions);
};

// Adds one completed episode. Throws std::invalid_argument when the
// trajectory length or any index does not fit the declared shape.
void accumulate(VisitStatistics& stats, const Trajectory& traj);

// Counts as released by a privatizer. Entries are real-valued and may be
// negative; consumers must not assume consistency between the tables.
struct PrivateCounts {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> visits;       // [h][s][a]
  std::vector<double> cost_sums;    // [h][s][a]
  std::vector<double> transitions;  // [h][s][a][s']

  std::size_t cell_index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
  }
  std::size_t trans_index(int h, int s, int a, int s2) const {
    return cell_index(h, s, a) * num_states + s2;
  }
  double visit(int h, int s, int a) const { return visits[cell_index(h, s, a)]; }
  double cost_sum(int h, int s, int a) const { return cost_sums[cell_index(h, s, a)]; }
  double transition(int h, int s, int a, int s2) const {
    return transitions[trans_index(h, s, a, s2)];
  }

  static PrivateCounts zeros(int horizon, int num_states, int num_actions);
};

// Uniform accuracy levels of released counts: |visit noise| and |cost noise|
// are bounded by e1, |transition noise| by e2 (with high probability).
// Exact counts correspond to e1 = e2 = 0.
struct PrecisionLevels {
  double e1 = 0.0;
  double e2 = 0.0;
};

// Shared denominator of all private estimates and bonuses.
inline double count_denominator(double visit_count, const PrecisionLevels& prec) {
  return std::max(1.0, visit_count + prec.e1);
}

// Plug-in cost and transition estimates from released counts. Numerators
// are clamped at zero; transition rows are deliberately not renormalized,
// so a row may sum to less or slightly more than 1.
struct PrivateEstimates {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> mean_costs;   // [h][s][a]
  std::vector<double> transitions;  // [h][s][a][s']

  std::size_t cell_index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
  }
  double mean_cost(int h, int s, int a) const { return mean_costs[cell_index(h, s, a)]; }
  double transition(int h, int s, int a, int s2) const {
    return transitions[cell_index(h, s, a) * num_states + s2];
  }
};

PrivateEstimates private_estimates(const PrivateCounts& counts,
                                   const PrecisionLevels& prec);
void private_estimates(const PrivateCounts& counts, const PrecisionLevels& prec,
                       PrivateEstimates& out);

// Log terms shared by the confidence widths; T is the total number of
// steps (episodes times horizon), fixed at configuration time.
struct LogConstants {
  double l_cost = 0.0;   // sqrt(2 ln(4 S A T / delta))
  double l_trans = 0.0;  // sqrt(4 S ln(6 S A T / delta))
  double l_prime = 0.0;  // ln(6 S A T / delta)
};

// Throws std::invalid_argument when S, A or T is nonpositive or delta <= 0.
LogConstants log_constants(int num_states, int num_actions, std::int64_t total_steps,
                           double delta);

// Confidence widths; `visit_count` is the released (possibly noisy) count.
double bonus_cost(double visit_count, const PrecisionLevels& prec, double l_cost);
double bonus_transition(double visit_count, const PrecisionLevels& prec,
                        double l_trans, int num_states);
double bonus_pv(double visit_count, const PrecisionLevels& prec, double l_cost,
                int num_states, int horizon);

struct BonusTables {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> cost;        // [h][s][a]
  std::vector<double> transition;  // [h][s][a]
  std::vector<double> pv;          // [h][s][a]

  std::size_t cell_index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states + s) * num_actions + a;
  }
};

BonusTables compute_bonuses(const PrivateCounts& counts, const PrecisionLevels& prec,
                            const LogConstants& consts);

}  // namespace dprl
