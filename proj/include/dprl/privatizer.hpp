#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dprl/mdp.hpp"
#include "dprl/rng.hpp"
#include "dprl/statistics.hpp"

namespace dprl {

enum class Mechanism { kIdentity, kCentral, kLocal };

std::string to_string(Mechanism mechanism);
Mechanism mechanism_from_string(const std::string& name);

struct PrivatizerConfig {
  Mechanism mechanism = Mechanism::kIdentity;
  double epsilon = 1.0;
  double delta = 0.1;
  std::int64_t num_episodes = 1;  // K, fixed up front
  int horizon = 1;
  int num_states = 1;
  int num_actions = 1;
  std::uint64_t rng_seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// Closed-form accuracy levels of the released counts for each mechanism,
// with T = K * horizon. Identity releases exact counts, so both are 0.
PrecisionLevels precision_levels(const PrivatizerConfig& config);

// 1-based inclusive interval [lo, hi] whose length is a power of two and
// whose start is aligned to that power (lo - 1 divisible by hi - lo + 1).
struct DyadicInterval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool operator==(const DyadicInterval&) const = default;
};

// Greedy decomposition of [1, n] into maximal dyadic intervals, left to
// right. Empty for n = 0; the number of intervals is popcount(n).
std::vector<DyadicInterval> dyadic_cover(std::int64_t n);

// Streaming counter over a bounded stream: keeps one noisy partial sum per
// dyadic level, which at any time is exactly the dyadic decomposition of
// [1, items]. A node receives fresh Laplace noise once, when the item
// completing it arrives; release() then sums the stored noisy nodes, so
// repeated releases are identical and old nodes can be discarded.
class BinaryTreeCounter {
 public:
  BinaryTreeCounter(std::int64_t capacity, double noise_scale);

  void ingest(double value, Rng& rng);
  void ingest_noiseless(double value);

  double release() const;  // noisy prefix sum over all ingested items
  std::int64_t items() const { return items_; }
  double noise_scale() const { return noise_scale_; }

  struct Node {
    DyadicInterval range;
    double psum = 0.0;   // exact sum over the range
    double noise = 0.0;  // Laplace perturbation attached to the node
  };
  // Stored nodes forming the decomposition of [1, items], left to right.
  std::vector<Node> cover_nodes() const;
  int finalized_level() const { return last_level_; }  // level of the newest node
  double noise_at_level(int level) const { return noises_[level]; }

  static int num_levels(std::int64_t capacity);

 private:
  int advance(double value);

  std::int64_t capacity_ = 0;
  std::int64_t items_ = 0;
  int last_level_ = -1;
  double noise_scale_ = 0.0;
  std::vector<double> psums_;
  std::vector<double> noises_;
};

// Releases per-(h,s,a) visit and cost counts plus per-(h,s,a,s') transition
// counts computed from the episodes ingested so far. The protocol is
// strict: episodes are ingested in order, and counts for episode k may be
// requested only after exactly k-1 episodes have been ingested.
class Privatizer {
 public:
  virtual ~Privatizer() = default;

  virtual Mechanism mechanism() const = 0;
  virtual PrecisionLevels precision_levels() const = 0;
  virtual std::int64_t episodes_ingested() const = 0;
  virtual void ingest(const Trajectory& traj) = 0;

  // Counts available at the start of episode k (1-based). Deterministic:
  // repeated calls return identical values. Throws std::logic_error when
  // k - 1 != episodes_ingested().
  virtual void release(std::int64_t episode, PrivateCounts& out) const = 0;
  PrivateCounts release(std::int64_t episode) const;

  // Audit hook: mechanisms that attach noise to stored nodes write one CSV
  // row per finalized node. Default is a no-op.
  virtual void set_noise_log(std::ostream* /*log*/) {}
};

std::unique_ptr<Privatizer> make_privatizer(const PrivatizerConfig& config);

// Same mechanisms with the Laplace source replaced by zeros. Reachable only
// from test code; no configuration or CLI path constructs this.
std::unique_ptr<Privatizer> make_zero_noise_privatizer_for_tests(
    const PrivatizerConfig& config);

class CentralPrivatizer final : public Privatizer {
 public:
  CentralPrivatizer(const PrivatizerConfig& config, bool zero_noise);

  Mechanism mechanism() const override { return Mechanism::kCentral; }
  PrecisionLevels precision_levels() const override;
  std::int64_t episodes_ingested() const override { return episodes_; }
  void ingest(const Trajectory& traj) override;
  void release(std::int64_t episode, PrivateCounts& out) const override;
  using Privatizer::release;
  void set_noise_log(std::ostream* log) override;

  double noise_scale() const { return noise_scale_; }
  std::size_t num_counters() const { return counters_.size(); }
  const BinaryTreeCounter& counter(std::size_t index) const {
    return counters_[index];
  }

 private:
  PrivatizerConfig config_;
  bool zero_noise_ = false;
  double noise_scale_ = 0.0;
  Rng rng_;
  std::int64_t episodes_ = 0;
  std::size_t visit_offset_ = 0;
  std::size_t cost_offset_ = 0;
  std::size_t trans_offset_ = 0;
  std::vector<BinaryTreeCounter> counters_;
  std::vector<double> increments_;  // per-episode scratch, one per counter
  std::ostream* noise_log_ = nullptr;
};

class LocalPrivatizer final : public Privatizer {
 public:
  LocalPrivatizer(const PrivatizerConfig& config, bool zero_noise);

  Mechanism mechanism() const override { return Mechanism::kLocal; }
  PrecisionLevels precision_levels() const override;
  std::int64_t episodes_ingested() const override { return episodes_; }
  void ingest(const Trajectory& traj) override;
  void release(std::int64_t episode, PrivateCounts& out) const override;
  using Privatizer::release;

  double noise_scale() const { return noise_scale_; }

 private:
  PrivatizerConfig config_;
  bool zero_noise_ = false;
  double noise_scale_ = 0.0;
  Rng rng_;
  std::int64_t episodes_ = 0;
  PrivateCounts sums_;  // running sums of perturbed per-episode counts
};

class IdentityPrivatizer final : public Privatizer {
 public:
  explicit IdentityPrivatizer(const PrivatizerConfig& config);

  Mechanism mechanism() const override { return Mechanism::kIdentity; }
  PrecisionLevels precision_levels() const override { return {0.0, 0.0}; }
  std::int64_t episodes_ingested() const override { return stats_.episodes; }
  void ingest(const Trajectory& traj) override;
  void release(std::int64_t episode, PrivateCounts& out) const override;
  using Privatizer::release;

 private:
  PrivatizerConfig config_;
  VisitStatistics stats_;
};

}  // namespace dprl
