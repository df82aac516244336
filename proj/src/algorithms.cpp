#include "dprl/algorithms.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dprl/text.hpp"

namespace dprl {

double AlgoConfig::effective_learning_rate() const {
  if (learning_rate > 0.0) return learning_rate;
  if (num_actions <= 1) return 0.0;
  return std::sqrt(2.0 * std::log(static_cast<double>(num_actions)) /
                   (static_cast<double>(horizon) * horizon *
                    static_cast<double>(num_episodes)));
}

void AlgoConfig::validate() const {
  if (horizon <= 0 || num_states <= 0 || num_actions <= 0) {
    throw std::invalid_argument("AlgoConfig: dimensions must be positive");
  }
  if (num_episodes < 1) {
    throw std::invalid_argument("AlgoConfig: num_episodes must be >= 1");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("AlgoConfig: delta must lie in (0,1]");
  }
  if (learning_rate < 0.0) {
    throw std::invalid_argument("AlgoConfig: learning_rate must be >= 0");
  }
  if (bonus_scale < 0.0) {
    throw std::invalid_argument("AlgoConfig: bonus_scale must be >= 0");
  }
}

void AlgoConfig::validate(const EnvDims& dims) const {
  validate();
  if (dims.num_states != num_states || dims.num_actions != num_actions ||
      dims.horizon != horizon) {
    throw std::invalid_argument("AlgoConfig: environment shape does not match");
  }
}

namespace {

void check_counts_shape(const PrivateCounts& counts, const AlgoConfig& config) {
  if (counts.horizon != config.horizon || counts.num_states != config.num_states ||
      counts.num_actions != config.num_actions) {
    throw std::invalid_argument("released counts shape does not match the config");
  }
}

}  // namespace

PoEvaluation po_evaluate(const PrivateCounts& counts, const PrecisionLevels& prec,
                         const PolicyTable& policy, const AlgoConfig& config) {
  config.validate();
  check_counts_shape(counts, config);
  if (policy.horizon != config.horizon || policy.num_states != config.num_states ||
      policy.num_actions != config.num_actions) {
    throw std::invalid_argument("po_evaluate: policy shape does not match");
  }
  const int H = config.horizon;
  const int S = config.num_states;
  const int A = config.num_actions;
  const LogConstants consts = log_constants(
      S, A, config.num_episodes * static_cast<std::int64_t>(H), config.delta);
  const PrivateEstimates est = private_estimates(counts, prec);

  PoEvaluation out{QTable::zeros(H, S, A), ValueTable::zeros(H, S)};
  for (int h = H - 1; h >= 0; --h) {
    const double ceiling = H - h;  // value of a whole remaining episode
    const double* vnext = &out.v.values[static_cast<std::size_t>(h + 1) * S];
    for (int s = 0; s < S; ++s) {
      double vs = 0.0;
      for (int a = 0; a < A; ++a) {
        const std::size_t cell = counts.cell_index(h, s, a);
        const double n = counts.visits[cell];
        const double width =
            config.bonus_scale * (bonus_cost(n, prec, consts.l_cost) +
                                  H * bonus_transition(n, prec, consts.l_trans, S));
        double target = est.mean_costs[cell];
        const double* row = &est.transitions[cell * S];
        for (int s2 = 0; s2 < S; ++s2) {
          target += row[s2] * vnext[s2];
        }
        const double q = std::min(ceiling, std::max(0.0, target - width));
        out.q.values[cell] = q;
        vs += policy.probs[cell] * q;
      }
      out.v.value(h, s) = vs;
    }
  }
  return out;
}

PolicyTable po_improve(const PolicyTable& policy, const QTable& q,
                       double learning_rate) {
  if (learning_rate < 0.0) {
    throw std::invalid_argument("po_improve: learning_rate must be >= 0");
  }
  if (policy.horizon != q.horizon || policy.num_states != q.num_states ||
      policy.num_actions != q.num_actions) {
    throw std::invalid_argument("po_improve: policy and Q shapes differ");
  }
  PolicyTable out = policy;
  const int A = policy.num_actions;
  for (int h = 0; h < policy.horizon; ++h) {
    for (int s = 0; s < policy.num_states; ++s) {
      const std::size_t base = policy.index(h, s, 0);
      // Shift by the row minimum so the largest weight has exponent 0.
      double qmin = q.values[base];
      for (int a = 1; a < A; ++a) {
        qmin = std::min(qmin, q.values[base + a]);
      }
      double z = 0.0;
      for (int a = 0; a < A; ++a) {
        const double w = policy.probs[base + a] *
                         std::exp(-learning_rate * (q.values[base + a] - qmin));
        out.probs[base + a] = w;
        z += w;
      }
      if (!(z > 0.0)) {
        throw std::invalid_argument("po_improve: policy row carries no mass");
      }
      for (int a = 0; a < A; ++a) {
        out.probs[base + a] /= z;
      }
    }
  }
  return out;
}

ViBackward vi_backward(const PrivateCounts& counts, const PrecisionLevels& prec,
                       const AlgoConfig& config) {
  config.validate();
  check_counts_shape(counts, config);
  const int H = config.horizon;
  const int S = config.num_states;
  const int A = config.num_actions;
  const LogConstants consts = log_constants(
      S, A, config.num_episodes * static_cast<std::int64_t>(H), config.delta);
  const PrivateEstimates est = private_estimates(counts, prec);

  ViBackward out{QTable::zeros(H, S, A), ValueTable::zeros(H, S),
                 PolicyTable::uniform(H, S, A)};
  std::fill(out.policy.probs.begin(), out.policy.probs.end(), 0.0);
  for (int h = H - 1; h >= 0; --h) {
    const double ceiling = H - h;
    const double* vnext = &out.v.values[static_cast<std::size_t>(h + 1) * S];
    for (int s = 0; s < S; ++s) {
      double best = 0.0;
      int best_action = 0;
      for (int a = 0; a < A; ++a) {
        const std::size_t cell = counts.cell_index(h, s, a);
        const double n = counts.visits[cell];
        const double width =
            config.bonus_scale * (bonus_cost(n, prec, consts.l_cost) +
                                  bonus_pv(n, prec, consts.l_cost, S, H));
        double target = est.mean_costs[cell];
        const double* row = &est.transitions[cell * S];
        for (int s2 = 0; s2 < S; ++s2) {
          target += row[s2] * vnext[s2];
        }
        const double q = std::min(ceiling, std::max(0.0, target - width));
        out.q.values[cell] = q;
        if (a == 0 || q < best) {
          best = q;
          best_action = a;
        }
      }
      out.v.value(h, s) = best;
      out.policy.prob(h, s, best_action) = 1.0;
    }
  }
  return out;
}

namespace {

void dump_episode_tables(std::ostream& out, std::int64_t episode,
                         const PrivateCounts& counts, const PrecisionLevels& prec,
                         const AlgoConfig& config) {
  if (episode == 1) {
    out << "episode,h,s,a,visit,cost_sum,cost_est,bonus_cost,bonus_transition,"
           "bonus_pv\n";
  }
  const LogConstants consts = log_constants(
      config.num_states, config.num_actions,
      config.num_episodes * static_cast<std::int64_t>(config.horizon),
      config.delta);
  const PrivateEstimates est = private_estimates(counts, prec);
  const BonusTables bonuses = compute_bonuses(counts, prec, consts);
  for (int h = 0; h < config.horizon; ++h) {
    for (int s = 0; s < config.num_states; ++s) {
      for (int a = 0; a < config.num_actions; ++a) {
        const std::size_t cell = counts.cell_index(h, s, a);
        out << episode << ',' << h << ',' << s << ',' << a << ','
            << format_double(counts.visits[cell]) << ','
            << format_double(counts.cost_sums[cell]) << ','
            << format_double(est.mean_costs[cell]) << ','
            << format_double(bonuses.cost[cell]) << ','
            << format_double(bonuses.transition[cell]) << ','
            << format_double(bonuses.pv[cell]) << '\n';
      }
    }
  }
}

void check_run_preconditions(RolloutEnv& env, Privatizer& privatizer,
                             const AlgoConfig& config) {
  config.validate(env.dims());
  if (privatizer.episodes_ingested() != 0) {
    throw std::logic_error("run: privatizer has already ingested episodes");
  }
}

}  // namespace

void run_private_ucb_po(RolloutEnv& env, Privatizer& privatizer,
                        const AlgoConfig& config, const EpisodeObserver& observer) {
  check_run_preconditions(env, privatizer, config);
  const double eta = config.effective_learning_rate();
  const PrecisionLevels prec = privatizer.precision_levels();
  PolicyTable policy =
      PolicyTable::uniform(config.horizon, config.num_states, config.num_actions);
  PrivateCounts counts;
  for (std::int64_t k = 1; k <= config.num_episodes; ++k) {
    privatizer.release(k, counts);
    check_counts_shape(counts, config);
    if (config.table_dump != nullptr) {
      dump_episode_tables(*config.table_dump, k, counts, prec, config);
    }
    PoEvaluation eval = po_evaluate(counts, prec, policy, config);
    Trajectory traj = env.rollout(policy);
    privatizer.ingest(traj);

    EpisodeArtifacts art;
    art.episode = k;
    art.policy = policy;
    art.trajectory = std::move(traj);
    if (config.record_value_tables) {
      art.q_values = eval.q;
      art.value_estimates = eval.v;
    }
    observer(std::move(art));

    policy = po_improve(policy, eval.q, eta);
  }
}

void run_private_ucb_vi(RolloutEnv& env, Privatizer& privatizer,
                        const AlgoConfig& config, const EpisodeObserver& observer) {
  check_run_preconditions(env, privatizer, config);
  const PrecisionLevels prec = privatizer.precision_levels();
  PrivateCounts counts;
  for (std::int64_t k = 1; k <= config.num_episodes; ++k) {
    privatizer.release(k, counts);
    check_counts_shape(counts, config);
    if (config.table_dump != nullptr) {
      dump_episode_tables(*config.table_dump, k, counts, prec, config);
    }
    ViBackward pass = vi_backward(counts, prec, config);
    Trajectory traj = env.rollout(pass.policy);
    privatizer.ingest(traj);

    EpisodeArtifacts art;
    art.episode = k;
    art.policy = std::move(pass.policy);
    art.trajectory = std::move(traj);
    if (config.record_value_tables) {
      art.q_values = std::move(pass.q);
      art.value_estimates = std::move(pass.v);
    }
    observer(std::move(art));
  }
}

std::vector<EpisodeArtifacts> run_private_ucb_po(RolloutEnv& env,
                                                 Privatizer& privatizer,
                                                 const AlgoConfig& config) {
  std::vector<EpisodeArtifacts> episodes;
  episodes.reserve(static_cast<std::size_t>(config.num_episodes));
  run_private_ucb_po(env, privatizer, config,
                     [&](EpisodeArtifacts&& art) { episodes.push_back(std::move(art)); });
  return episodes;
}

std::vector<EpisodeArtifacts> run_private_ucb_vi(RolloutEnv& env,
                                                 Privatizer& privatizer,
                                                 const AlgoConfig& config) {
  std::vector<EpisodeArtifacts> episodes;
  episodes.reserve(static_cast<std::size_t>(config.num_episodes));
  run_private_ucb_vi(env, privatizer, config,
                     [&](EpisodeArtifacts&& art) { episodes.push_back(std::move(art)); });
  return episodes;
}

}  // namespace dprl
