#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dprl/algorithms.hpp"
#include "dprl/mdp.hpp"
#include "dprl/privatizer.hpp"
#include "dprl/text.hpp"

namespace dprl {

inline constexpr const char* kVersion = "0.1.0";

// Configuration error that names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error("config key '" + key + "': " + message), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  std::string environment = "riverswim";  // built-in name or MDP JSON path
  std::vector<std::string> algorithms = {"po"};
  std::vector<std::string> privatizers = {"identity"};
  std::vector<double> epsilons = {1.0};
  double delta = 0.1;
  std::int64_t episodes = 3000;
  int seeds = 10;
  std::uint64_t base_seed = 1;
  std::string output_dir = "results";
  bool plot = true;
  bool per_seed_csv = true;
  double bonus_scale = 1.0;
  double learning_rate = 0.0;  // 0 selects the algorithm default
  int jobs = 0;                // 0 selects hardware concurrency
  std::string table_dump;     // per-episode counts/bonus CSV (single run only)
  std::string noise_log;      // central noise audit CSV (single run only)

  void validate() const;  // throws ConfigError
};

// Strict parser: unknown keys are rejected. Scalar values are accepted
// where lists are expected ("algorithm": "po" and "algorithms": ["po"]
// are equivalent).
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

enum class Algorithm { kPo, kVi };
std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);

// One swept configuration. Identity runs carry no epsilon; private
// mechanisms appear once per configured epsilon.
struct RunGroup {
  Algorithm algorithm = Algorithm::kPo;
  Mechanism mechanism = Mechanism::kIdentity;
  std::optional<double> epsilon;

  std::string id() const;  // e.g. "po_identity", "vi_central_eps0.2"
};

std::vector<RunGroup> enumerate_groups(const ExperimentConfig& config);

struct RegretCurve {
  std::string group_id;
  int seed_index = 0;
  std::vector<double> increments;  // per-episode regret of the played policy
  std::vector<double> cumulative;
};

// Per-episode regret of the recorded policies against the optimal value of
// the true MDP, evaluated exactly.
RegretCurve regret_curve(const std::vector<EpisodeArtifacts>& episodes,
                         const MdpSpec& mdp);

struct AggregateResult {
  std::string group_id;
  Algorithm algorithm = Algorithm::kPo;
  Mechanism mechanism = Mechanism::kIdentity;
  std::optional<double> epsilon;
  int seeds = 0;
  std::vector<double> mean_cumulative;
  std::vector<double> std_cumulative;  // population std across seeds
};

AggregateResult aggregate(const RunGroup& group,
                          const std::vector<RegretCurve>& curves);

// Aggregate CSV: header episode,mean_cum_regret,std_cum_regret and one row
// per episode. Per-seed CSV: header episode,cum_regret.
void write_csv(const AggregateResult& result, const std::string& path);
void write_seed_csv(const RegretCurve& curve, const std::string& path);

struct PlotSeries {
  std::string label;
  std::vector<double> mean;
  std::vector<double> std_dev;
};

PlotSeries read_series_csv(const std::string& path);

// Multi-series SVG: mean cumulative regret per group with a +-1 std band.
void emit_plot(const std::vector<PlotSeries>& series, const std::string& path);
void emit_plot(const std::vector<AggregateResult>& results, const std::string& path);

struct ExperimentOutput {
  std::vector<AggregateResult> results;  // in group enumeration order
  std::vector<std::string> csv_paths;    // aggregate CSVs, one per group
  std::string manifest_path;
  std::string plot_path;  // empty when plotting is disabled
};

// Runs the full sweep (groups x seeds, distributed over a bounded worker
// pool), writes CSVs, a manifest and optionally the plot. Every byte of
// output is a deterministic function of the configuration.
ExperimentOutput run_experiment(const ExperimentConfig& config);

}  // namespace dprl
