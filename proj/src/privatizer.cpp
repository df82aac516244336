#include "dprl/privatizer.hpp"

#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dprl/text.hpp"

namespace dprl {

namespace {

// Per-node Laplace scale of the streaming counters: the per-statistic
// budget epsilon' = epsilon / (3H) is split across the tree levels, giving
// scale ceil(log2 K) / epsilon' per node. The depth factor is clamped at 1
// so that K = 1 still yields a positive scale.
double central_noise_scale(const PrivatizerConfig& config) {
  const double levels = std::max(
      std::int64_t{1},
      static_cast<std::int64_t>(
          std::ceil(std::log2(static_cast<double>(config.num_episodes)))));
  return 3.0 * config.horizon * levels / config.epsilon;
}

double local_noise_scale(const PrivatizerConfig& config) {
  return 3.0 * config.horizon / config.epsilon;
}

}  // namespace

std::string to_string(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::kIdentity: return "identity";
    case Mechanism::kCentral: return "central";
    case Mechanism::kLocal: return "local";
  }
  return "unknown";
}

Mechanism mechanism_from_string(const std::string& name) {
  if (name == "identity") return Mechanism::kIdentity;
  if (name == "central") return Mechanism::kCentral;
  if (name == "local") return Mechanism::kLocal;
  throw std::invalid_argument("unknown privatizer '" + name +
                              "' (expected identity, central or local)");
}

void PrivatizerConfig::validate() const {
  if (horizon <= 0 || num_states <= 0 || num_actions <= 0) {
    throw std::invalid_argument("PrivatizerConfig: dimensions must be positive");
  }
  if (num_episodes < 1) {
    throw std::invalid_argument("PrivatizerConfig: num_episodes must be >= 1");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("PrivatizerConfig: delta must lie in (0,1]");
  }
  if (mechanism != Mechanism::kIdentity && !(epsilon > 0.0)) {
    throw std::invalid_argument("PrivatizerConfig: epsilon must be > 0");
  }
}

PrecisionLevels precision_levels(const PrivatizerConfig& config) {
  config.validate();
  if (config.mechanism == Mechanism::kIdentity) {
    return {0.0, 0.0};
  }
  const double S = config.num_states;
  const double A = config.num_actions;
  const double K = static_cast<double>(config.num_episodes);
  const double T = K * config.horizon;
  const double factor = 3.0 * config.horizon / config.epsilon;
  const double log_visit = std::log(6.0 * S * A * T / config.delta);
  const double log_trans = std::log(6.0 * S * S * A * T / config.delta);
  PrecisionLevels prec;
  if (config.mechanism == Mechanism::kCentral) {
    const double lk = std::log(K);
    prec.e1 = factor * std::sqrt(8.0 * lk * lk * lk * log_visit);
    prec.e2 = factor * std::sqrt(8.0 * lk * lk * lk * log_trans);
  } else {
    prec.e1 = factor * std::sqrt(8.0 * K * log_visit);
    prec.e2 = factor * std::sqrt(8.0 * K * log_trans);
  }
  return prec;
}

std::vector<DyadicInterval> dyadic_cover(std::int64_t n) {
  if (n < 0) {
    throw std::invalid_argument("dyadic_cover: n must be >= 0");
  }
  std::vector<DyadicInterval> cover;
  const auto bits = static_cast<std::uint64_t>(n);
  std::int64_t pos = 0;
  for (int j = std::bit_width(bits); j-- > 0;) {
    if ((bits >> j) & 1u) {
      const std::int64_t len = std::int64_t{1} << j;
      cover.push_back({pos + 1, pos + len});
      pos += len;
    }
  }
  return cover;
}

int BinaryTreeCounter::num_levels(std::int64_t capacity) {
  if (capacity < 1) {
    throw std::invalid_argument("BinaryTreeCounter: capacity must be >= 1");
  }
  return std::bit_width(static_cast<std::uint64_t>(capacity));
}

BinaryTreeCounter::BinaryTreeCounter(std::int64_t capacity, double noise_scale)
    : capacity_(capacity), noise_scale_(noise_scale) {
  if (noise_scale < 0.0) {
    throw std::invalid_argument("BinaryTreeCounter: noise scale must be >= 0");
  }
  const int levels = num_levels(capacity);
  psums_.assign(levels, 0.0);
  noises_.assign(levels, 0.0);
}

int BinaryTreeCounter::advance(double value) {
  if (items_ == capacity_) {
    throw std::logic_error("BinaryTreeCounter: capacity exhausted");
  }
  items_ += 1;
  const int level = std::countr_zero(static_cast<std::uint64_t>(items_));
  double sum = value;
  for (int j = 0; j < level; ++j) {
    sum += psums_[j];
    psums_[j] = 0.0;
    noises_[j] = 0.0;
  }
  psums_[level] = sum;
  last_level_ = level;
  return level;
}

void BinaryTreeCounter::ingest(double value, Rng& rng) {
  const int level = advance(value);
  noises_[level] = rng.laplace(noise_scale_);
}

void BinaryTreeCounter::ingest_noiseless(double value) {
  const int level = advance(value);
  noises_[level] = 0.0;
}

double BinaryTreeCounter::release() const {
  double sum = 0.0;
  auto bits = static_cast<std::uint64_t>(items_);
  while (bits != 0) {
    const int j = std::countr_zero(bits);
    sum += psums_[j] + noises_[j];
    bits &= bits - 1;
  }
  return sum;
}

std::vector<BinaryTreeCounter::Node> BinaryTreeCounter::cover_nodes() const {
  std::vector<Node> nodes;
  const auto bits = static_cast<std::uint64_t>(items_);
  std::int64_t pos = 0;
  for (int j = std::bit_width(bits); j-- > 0;) {
    if ((bits >> j) & 1u) {
      const std::int64_t len = std::int64_t{1} << j;
      nodes.push_back({{pos + 1, pos + len}, psums_[j], noises_[j]});
      pos += len;
    }
  }
  return nodes;
}

PrivateCounts Privatizer::release(std::int64_t episode) const {
  PrivateCounts counts;
  release(episode, counts);
  return counts;
}

namespace {

void check_trajectory(const Trajectory& traj, const PrivatizerConfig& config) {
  if (static_cast<int>(traj.size()) != config.horizon) {
    throw std::invalid_argument("Privatizer: trajectory length != horizon");
  }
  for (const TrajectoryStep& st : traj) {
    if (st.state < 0 || st.state >= config.num_states || st.action < 0 ||
        st.action >= config.num_actions || st.next_state < 0 ||
        st.next_state >= config.num_states) {
      throw std::invalid_argument("Privatizer: trajectory index out of range");
    }
  }
}

void check_release_episode(std::int64_t episode, std::int64_t ingested) {
  if (episode - 1 != ingested) {
    throw std::logic_error("Privatizer: release(k) requires exactly k-1 ingested episodes");
  }
}

void check_ingest_capacity(std::int64_t ingested, std::int64_t capacity) {
  if (ingested >= capacity) {
    throw std::logic_error("Privatizer: more episodes than configured");
  }
}

}  // namespace

CentralPrivatizer::CentralPrivatizer(const PrivatizerConfig& config, bool zero_noise)
    : config_(config),
      zero_noise_(zero_noise),
      noise_scale_(central_noise_scale(config)),
      rng_(config.rng_seed) {
  config_.validate();
  const std::size_t cells = static_cast<std::size_t>(config.horizon) *
                            config.num_states * config.num_actions;
  visit_offset_ = 0;
  cost_offset_ = cells;
  trans_offset_ = 2 * cells;
  const std::size_t total = cells * (2 + config.num_states);
  counters_.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    counters_.emplace_back(config.num_episodes, noise_scale_);
  }
  increments_.assign(total, 0.0);
}

PrecisionLevels CentralPrivatizer::precision_levels() const {
  return dprl::precision_levels(config_);
}

void CentralPrivatizer::set_noise_log(std::ostream* log) {
  noise_log_ = log;
  if (noise_log_ != nullptr) {
    *noise_log_ << "episode,counter,level,lo,hi,noise\n";
  }
}

void CentralPrivatizer::ingest(const Trajectory& traj) {
  check_ingest_capacity(episodes_, config_.num_episodes);
  check_trajectory(traj, config_);
  std::fill(increments_.begin(), increments_.end(), 0.0);
  const int S = config_.num_states;
  const int A = config_.num_actions;
  for (int h = 0; h < config_.horizon; ++h) {
    const TrajectoryStep& st = traj[h];
    const std::size_t cell =
        (static_cast<std::size_t>(h) * S + st.state) * A + st.action;
    increments_[visit_offset_ + cell] += 1.0;
    increments_[cost_offset_ + cell] += st.cost;
    increments_[trans_offset_ + cell * S + st.next_state] += 1.0;
  }
  // Every counter consumes one item per episode, in a fixed order, so the
  // noise stream is deterministic for a given seed.
  for (std::size_t m = 0; m < counters_.size(); ++m) {
    if (zero_noise_) {
      counters_[m].ingest_noiseless(increments_[m]);
    } else {
      counters_[m].ingest(increments_[m], rng_);
    }
    if (noise_log_ != nullptr) {
      const BinaryTreeCounter& c = counters_[m];
      const int level = c.finalized_level();
      const std::int64_t hi = c.items();
      const std::int64_t lo = hi - (std::int64_t{1} << level) + 1;
      *noise_log_ << episodes_ + 1 << ',' << m << ',' << level << ',' << lo
                  << ',' << hi << ',' << format_double(c.noise_at_level(level))
                  << '\n';
    }
  }
  episodes_ += 1;
}

void CentralPrivatizer::release(std::int64_t episode, PrivateCounts& out) const {
  check_release_episode(episode, episodes_);
  out = PrivateCounts::zeros(config_.horizon, config_.num_states,
                             config_.num_actions);
  const std::size_t cells = out.visits.size();
  for (std::size_t i = 0; i < cells; ++i) {
    out.visits[i] = counters_[visit_offset_ + i].release();
    out.cost_sums[i] = counters_[cost_offset_ + i].release();
  }
  for (std::size_t j = 0; j < out.transitions.size(); ++j) {
    out.transitions[j] = counters_[trans_offset_ + j].release();
  }
}

LocalPrivatizer::LocalPrivatizer(const PrivatizerConfig& config, bool zero_noise)
    : config_(config),
      zero_noise_(zero_noise),
      noise_scale_(local_noise_scale(config)),
      rng_(config.rng_seed),
      sums_(PrivateCounts::zeros(config.horizon, config.num_states,
                                 config.num_actions)) {
  config_.validate();
}

PrecisionLevels LocalPrivatizer::precision_levels() const {
  return dprl::precision_levels(config_);
}

void LocalPrivatizer::ingest(const Trajectory& traj) {
  check_ingest_capacity(episodes_, config_.num_episodes);
  check_trajectory(traj, config_);
  // Users perturb every coordinate of their per-episode counts, including
  // the zeros; the server only accumulates the noisy vectors.
  if (!zero_noise_) {
    for (double& v : sums_.visits) v += rng_.laplace(noise_scale_);
    for (double& v : sums_.cost_sums) v += rng_.laplace(noise_scale_);
    for (double& v : sums_.transitions) v += rng_.laplace(noise_scale_);
  }
  const int S = config_.num_states;
  const int A = config_.num_actions;
  for (int h = 0; h < config_.horizon; ++h) {
    const TrajectoryStep& st = traj[h];
    const std::size_t cell =
        (static_cast<std::size_t>(h) * S + st.state) * A + st.action;
    sums_.visits[cell] += 1.0;
    sums_.cost_sums[cell] += st.cost;
    sums_.transitions[cell * S + st.next_state] += 1.0;
  }
  episodes_ += 1;
}

void LocalPrivatizer::release(std::int64_t episode, PrivateCounts& out) const {
  check_release_episode(episode, episodes_);
  out = sums_;
}

IdentityPrivatizer::IdentityPrivatizer(const PrivatizerConfig& config)
    : config_(config),
      stats_(VisitStatistics::zeros(config.horizon, config.num_states,
                                    config.num_actions)) {
  config_.validate();
}

void IdentityPrivatizer::ingest(const Trajectory& traj) {
  check_ingest_capacity(stats_.episodes, config_.num_episodes);
  check_trajectory(traj, config_);
  accumulate(stats_, traj);
}

void IdentityPrivatizer::release(std::int64_t episode, PrivateCounts& out) const {
  check_release_episode(episode, stats_.episodes);
  out = PrivateCounts::zeros(config_.horizon, config_.num_states,
                             config_.num_actions);
  for (std::size_t i = 0; i < out.visits.size(); ++i) {
    out.visits[i] = static_cast<double>(stats_.visits[i]);
    out.cost_sums[i] = stats_.cost_sums[i];
  }
  for (std::size_t j = 0; j < out.transitions.size(); ++j) {
    out.transitions[j] = static_cast<double>(stats_.transitions[j]);
  }
}

namespace {

std::unique_ptr<Privatizer> build(const PrivatizerConfig& config, bool zero_noise) {
  config.validate();
  switch (config.mechanism) {
    case Mechanism::kIdentity:
      return std::make_unique<IdentityPrivatizer>(config);
    case Mechanism::kCentral:
      return std::make_unique<CentralPrivatizer>(config, zero_noise);
    case Mechanism::kLocal:
      return std::make_unique<LocalPrivatizer>(config, zero_noise);
  }
  throw std::invalid_argument("make_privatizer: unknown mechanism");
}

}  // namespace

std::unique_ptr<Privatizer> make_privatizer(const PrivatizerConfig& config) {
  return build(config, /*zero_noise=*/false);
}

std::unique_ptr<Privatizer> make_zero_noise_privatizer_for_tests(
    const PrivatizerConfig& config) {
  return build(config, /*zero_noise=*/true);
}

}  // namespace dprl
