#include "dprl/statistics.hpp"

#include <cmath>
#include <stdexcept>

namespace dprl {

VisitStatistics VisitStatistics::zeros(int horizon, int num_states, int num_actions) {
  VisitStatistics stats;
  stats.horizon = horizon;
  stats.num_states = num_states;
  stats.num_actions = num_actions;
  const std::size_t cells =
      static_cast<std::size_t>(horizon) * num_states * num_actions;
  stats.visits.assign(cells, 0);
  stats.cost_sums.assign(cells, 0.0);
  stats.transitions.assign(cells * num_states, 0);
  return stats;
}

void accumulate(VisitStatistics& stats, const Trajectory& traj) {
  if (static_cast<int>(traj.size()) != stats.horizon) {
    throw std::invalid_argument("accumulate: trajectory length != horizon");
  }
  for (int h = 0; h < stats.horizon; ++h) {
    const TrajectoryStep& st = traj[h];
    if (st.state < 0 || st.state >= stats.num_states || st.action < 0 ||
        st.action >= stats.num_actions || st.next_state < 0 ||
        st.next_state >= stats.num_states) {
      throw std::invalid_argument("accumulate: trajectory index out of range");
    }
    const std::size_t cell = stats.cell_index(h, st.state, st.action);
    stats.visits[cell] += 1;
    stats.cost_sums[cell] += st.cost;
    stats.transitions[cell * stats.num_states + st.next_state] += 1;
  }
  stats.episodes += 1;
}

PrivateCounts PrivateCounts::zeros(int horizon, int num_states, int num_actions) {
  PrivateCounts counts;
  counts.horizon = horizon;
  counts.num_states = num_states;
  counts.num_actions = num_actions;
  const std::size_t cells =
      static_cast<std::size_t>(horizon) * num_states * num_actions;
  counts.visits.assign(cells, 0.0);
  counts.cost_sums.assign(cells, 0.0);
  counts.transitions.assign(cells * num_states, 0.0);
  return counts;
}

void private_estimates(const PrivateCounts& counts, const PrecisionLevels& prec,
                       PrivateEstimates& out) {
  out.horizon = counts.horizon;
  out.num_states = counts.num_states;
  out.num_actions = counts.num_actions;
  const std::size_t cells = counts.visits.size();
  out.mean_costs.resize(cells);
  out.transitions.resize(cells * counts.num_states);
  const int S = counts.num_states;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const double denom = count_denominator(counts.visits[cell], prec);
    out.mean_costs[cell] = std::max(0.0, counts.cost_sums[cell]) / denom;
    const std::size_t base = cell * S;
    for (int s2 = 0; s2 < S; ++s2) {
      out.transitions[base + s2] =
          std::max(0.0, counts.transitions[base + s2]) / denom;
    }
  }
}

PrivateEstimates private_estimates(const PrivateCounts& counts,
                                   const PrecisionLevels& prec) {
  PrivateEstimates est;
  private_estimates(counts, prec, est);
  return est;
}

LogConstants log_constants(int num_states, int num_actions,
                           std::int64_t total_steps, double delta) {
  if (num_states <= 0 || num_actions <= 0 || total_steps <= 0) {
    throw std::invalid_argument("log_constants: S, A and T must be positive");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument("log_constants: delta must be positive");
  }
  const double sat = static_cast<double>(num_states) * num_actions *
                     static_cast<double>(total_steps);
  LogConstants consts;
  consts.l_cost = std::sqrt(2.0 * std::log(4.0 * sat / delta));
  consts.l_prime = std::log(6.0 * sat / delta);
  consts.l_trans = std::sqrt(4.0 * num_states * consts.l_prime);
  return consts;
}

double bonus_cost(double visit_count, const PrecisionLevels& prec, double l_cost) {
  const double denom = count_denominator(visit_count, prec);
  return l_cost / std::sqrt(denom) + 3.0 * prec.e1 / denom;
}

double bonus_transition(double visit_count, const PrecisionLevels& prec,
                        double l_trans, int num_states) {
  const double denom = count_denominator(visit_count, prec);
  return l_trans / std::sqrt(denom) +
         (num_states * prec.e2 + 2.0 * prec.e1) / denom;
}

double bonus_pv(double visit_count, const PrecisionLevels& prec, double l_cost,
                int num_states, int horizon) {
  const double denom = count_denominator(visit_count, prec);
  return horizon * l_cost / std::sqrt(denom) +
         horizon * (num_states * prec.e2 + 2.0 * prec.e1) / denom;
}

BonusTables compute_bonuses(const PrivateCounts& counts, const PrecisionLevels& prec,
                            const LogConstants& consts) {
  BonusTables tables;
  tables.horizon = counts.horizon;
  tables.num_states = counts.num_states;
  tables.num_actions = counts.num_actions;
  const std::size_t cells = counts.visits.size();
  tables.cost.resize(cells);
  tables.transition.resize(cells);
  tables.pv.resize(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const double n = counts.visits[cell];
    tables.cost[cell] = bonus_cost(n, prec, consts.l_cost);
    tables.transition[cell] =
        bonus_transition(n, prec, consts.l_trans, counts.num_states);
    tables.pv[cell] =
        bonus_pv(n, prec, consts.l_cost, counts.num_states, counts.horizon);
  }
  return tables;
}

}  // namespace dprl
