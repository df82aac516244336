#include "dprl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace dprl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Algorithm algorithm) {
  return algorithm == Algorithm::kPo ? "po" : "vi";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "po") return Algorithm::kPo;
  if (name == "vi") return Algorithm::kVi;
  throw std::invalid_argument("unknown algorithm '" + name +
                              "' (expected 'po' or 'vi')");
}

std::string RunGroup::id() const {
  std::string name = to_string(algorithm) + "_" + to_string(mechanism);
  if (epsilon.has_value()) {
    name += "_eps" + format_double(*epsilon);
  }
  return name;
}

void ExperimentConfig::validate() const {
  if (environment.empty()) {
    throw ConfigError("environment", "must not be empty");
  }
  if (algorithms.empty()) {
    throw ConfigError("algorithms", "at least one algorithm is required");
  }
  for (const std::string& name : algorithms) {
    if (name != "po" && name != "vi") {
      throw ConfigError("algorithms", "unknown algorithm '" + name + "'");
    }
  }
  if (privatizers.empty()) {
    throw ConfigError("privatizers", "at least one privatizer is required");
  }
  bool any_private = false;
  for (const std::string& name : privatizers) {
    if (name != "identity" && name != "central" && name != "local") {
      throw ConfigError("privatizers", "unknown privatizer '" + name + "'");
    }
    any_private = any_private || name != "identity";
  }
  for (double eps : epsilons) {
    if (!(eps > 0.0)) {
      throw ConfigError("epsilons", "epsilon must be > 0, got " + format_double(eps));
    }
  }
  if (any_private && epsilons.empty()) {
    throw ConfigError("epsilons", "required when a private mechanism is swept");
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ConfigError("delta", "must lie in (0,1]");
  }
  if (episodes < 1) {
    throw ConfigError("episodes", "must be >= 1");
  }
  if (seeds < 1) {
    throw ConfigError("seeds", "must be >= 1");
  }
  if (output_dir.empty()) {
    throw ConfigError("output_dir", "must not be empty");
  }
  if (bonus_scale < 0.0) {
    throw ConfigError("bonus_scale", "must be >= 0");
  }
  if (learning_rate < 0.0) {
    throw ConfigError("learning_rate", "must be >= 0");
  }
  if (jobs < 0) {
    throw ConfigError("jobs", "must be >= 0");
  }
}

namespace {

std::vector<std::string> string_list(const json& value, const std::string& key) {
  std::vector<std::string> out;
  if (value.is_string()) {
    out.push_back(value.get<std::string>());
  } else if (value.is_array()) {
    for (const json& item : value) {
      if (!item.is_string()) {
        throw ConfigError(key, "expected a string or list of strings");
      }
      out.push_back(item.get<std::string>());
    }
  } else {
    throw ConfigError(key, "expected a string or list of strings");
  }
  return out;
}

std::vector<double> number_list(const json& value, const std::string& key) {
  std::vector<double> out;
  if (value.is_number()) {
    out.push_back(value.get<double>());
  } else if (value.is_array()) {
    for (const json& item : value) {
      if (!item.is_number()) {
        throw ConfigError(key, "expected a number or list of numbers");
      }
      out.push_back(item.get<double>());
    }
  } else {
    throw ConfigError(key, "expected a number or list of numbers");
  }
  return out;
}

template <typename T>
T scalar(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: parse error: ") + e.what());
  }
  if (!doc.is_object()) {
    throw std::invalid_argument("config: top-level document must be an object");
  }
  ExperimentConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (key == "environment") {
      config.environment = scalar<std::string>(value, key);
    } else if (key == "algorithm" || key == "algorithms") {
      config.algorithms = string_list(value, key);
    } else if (key == "privatizer" || key == "privatizers") {
      config.privatizers = string_list(value, key);
    } else if (key == "epsilon" || key == "epsilons") {
      config.epsilons = number_list(value, key);
    } else if (key == "delta") {
      config.delta = scalar<double>(value, key);
    } else if (key == "episodes") {
      config.episodes = scalar<std::int64_t>(value, key);
    } else if (key == "seeds") {
      config.seeds = scalar<int>(value, key);
    } else if (key == "base_seed") {
      config.base_seed = scalar<std::uint64_t>(value, key);
    } else if (key == "output_dir") {
      config.output_dir = scalar<std::string>(value, key);
    } else if (key == "plot") {
      config.plot = scalar<bool>(value, key);
    } else if (key == "per_seed_csv") {
      config.per_seed_csv = scalar<bool>(value, key);
    } else if (key == "bonus_scale") {
      config.bonus_scale = scalar<double>(value, key);
    } else if (key == "learning_rate") {
      config.learning_rate = scalar<double>(value, key);
    } else if (key == "jobs") {
      config.jobs = scalar<int>(value, key);
    } else if (key == "table_dump") {
      config.table_dump = scalar<std::string>(value, key);
    } else if (key == "noise_log") {
      config.noise_log = scalar<std::string>(value, key);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_config: cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::vector<RunGroup> enumerate_groups(const ExperimentConfig& config) {
  config.validate();
  const auto dedupe = [](auto values) {
    auto out = values;
    out.clear();
    for (const auto& v : values) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
  };
  const std::vector<std::string> algorithms = dedupe(config.algorithms);
  const std::vector<std::string> privatizers = dedupe(config.privatizers);
  const std::vector<double> epsilons = dedupe(config.epsilons);

  std::vector<RunGroup> groups;
  for (const std::string& algo_name : algorithms) {
    const Algorithm algorithm = algorithm_from_string(algo_name);
    for (const std::string& priv_name : privatizers) {
      const Mechanism mechanism = mechanism_from_string(priv_name);
      if (mechanism == Mechanism::kIdentity) {
        groups.push_back({algorithm, mechanism, std::nullopt});
      } else {
        for (double eps : epsilons) {
          groups.push_back({algorithm, mechanism, eps});
        }
      }
    }
  }
  return groups;
}

RegretCurve regret_curve(const std::vector<EpisodeArtifacts>& episodes,
                         const MdpSpec& mdp) {
  const OptimalSolution opt = optimal_values(mdp);
  const double vstar = opt.values.value(0, mdp.initial_state);
  RegretCurve curve;
  curve.increments.reserve(episodes.size());
  curve.cumulative.reserve(episodes.size());
  double total = 0.0;
  for (const EpisodeArtifacts& art : episodes) {
    const ValueTable v = exact_policy_value(mdp, art.policy);
    const double r = v.value(0, mdp.initial_state) - vstar;
    total += r;
    curve.increments.push_back(r);
    curve.cumulative.push_back(total);
  }
  return curve;
}

AggregateResult aggregate(const RunGroup& group,
                          const std::vector<RegretCurve>& curves) {
  if (curves.empty()) {
    throw std::invalid_argument("aggregate: no curves");
  }
  const std::size_t length = curves.front().cumulative.size();
  for (const RegretCurve& curve : curves) {
    if (curve.cumulative.size() != length) {
      throw std::invalid_argument("aggregate: curve lengths differ");
    }
  }
  AggregateResult result;
  result.group_id = group.id();
  result.algorithm = group.algorithm;
  result.mechanism = group.mechanism;
  result.epsilon = group.epsilon;
  result.seeds = static_cast<int>(curves.size());
  result.mean_cumulative.assign(length, 0.0);
  result.std_cumulative.assign(length, 0.0);
  const double n = static_cast<double>(curves.size());
  for (std::size_t t = 0; t < length; ++t) {
    double mean = 0.0;
    for (const RegretCurve& curve : curves) {
      mean += curve.cumulative[t];
    }
    mean /= n;
    double var = 0.0;
    for (const RegretCurve& curve : curves) {
      const double d = curve.cumulative[t] - mean;
      var += d * d;
    }
    result.mean_cumulative[t] = mean;
    result.std_cumulative[t] = std::sqrt(var / n);
  }
  return result;
}

void write_csv(const AggregateResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_csv: cannot open '" + path + "'");
  }
  out << "episode,mean_cum_regret,std_cum_regret\n";
  for (std::size_t t = 0; t < result.mean_cumulative.size(); ++t) {
    out << (t + 1) << ',' << format_double(result.mean_cumulative[t]) << ','
        << format_double(result.std_cumulative[t]) << '\n';
  }
}

void write_seed_csv(const RegretCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_seed_csv: cannot open '" + path + "'");
  }
  out << "episode,cum_regret\n";
  for (std::size_t t = 0; t < curve.cumulative.size(); ++t) {
    out << (t + 1) << ',' << format_double(curve.cumulative[t]) << '\n';
  }
}

PlotSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_series_csv: cannot open '" + path + "'");
  }
  PlotSeries series;
  series.label = fs::path(path).stem().string();
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("read_series_csv: empty file '" + path + "'");
  }
  const bool has_std = line.find("std") != std::string::npos;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');  // episode index, implied by position
    if (!std::getline(row, field, ',')) {
      throw std::runtime_error("read_series_csv: malformed row in '" + path + "'");
    }
    series.mean.push_back(std::strtod(field.c_str(), nullptr));
    if (has_std && std::getline(row, field, ',')) {
      series.std_dev.push_back(std::strtod(field.c_str(), nullptr));
    } else {
      series.std_dev.push_back(0.0);
    }
  }
  return series;
}

namespace {

MdpSpec resolve_environment(const std::string& name) {
  if (name == "riverswim") {
    return build_riverswim();
  }
  return load_mdp(name);
}

struct RunContext {
  const MdpSpec* mdp = nullptr;
  double vstar = 0.0;
  const ExperimentConfig* config = nullptr;
};

RegretCurve execute_run(const RunContext& ctx, const RunGroup& group,
                        int seed_index, std::ostream* table_dump,
                        std::ostream* noise_log) {
  const ExperimentConfig& config = *ctx.config;
  const MdpSpec& mdp = *ctx.mdp;
  // Seed streams depend only on base_seed + seed index, so all groups see
  // the same environment randomness (common random numbers).
  const std::uint64_t run_seed = config.base_seed + static_cast<std::uint64_t>(seed_index);
  SimulatedEnv env(mdp, derive_seed(run_seed, 0));

  PrivatizerConfig privatizer_config;
  privatizer_config.mechanism = group.mechanism;
  privatizer_config.epsilon = group.epsilon.value_or(1.0);
  privatizer_config.delta = config.delta;
  privatizer_config.num_episodes = config.episodes;
  privatizer_config.horizon = mdp.horizon;
  privatizer_config.num_states = mdp.num_states;
  privatizer_config.num_actions = mdp.num_actions;
  privatizer_config.rng_seed = derive_seed(run_seed, 1);
  auto privatizer = make_privatizer(privatizer_config);
  if (noise_log != nullptr) {
    privatizer->set_noise_log(noise_log);
  }

  AlgoConfig algo_config;
  algo_config.num_episodes = config.episodes;
  algo_config.horizon = mdp.horizon;
  algo_config.num_states = mdp.num_states;
  algo_config.num_actions = mdp.num_actions;
  algo_config.delta = config.delta;
  algo_config.learning_rate = config.learning_rate;
  algo_config.bonus_scale = config.bonus_scale;
  algo_config.table_dump = table_dump;

  RegretCurve curve;
  curve.group_id = group.id();
  curve.seed_index = seed_index;
  curve.increments.reserve(static_cast<std::size_t>(config.episodes));
  curve.cumulative.reserve(static_cast<std::size_t>(config.episodes));
  double total = 0.0;
  const auto observer = [&](EpisodeArtifacts&& art) {
    const ValueTable v = exact_policy_value(mdp, art.policy);
    const double r = v.value(0, mdp.initial_state) - ctx.vstar;
    total += r;
    curve.increments.push_back(r);
    curve.cumulative.push_back(total);
  };
  if (group.algorithm == Algorithm::kPo) {
    run_private_ucb_po(env, *privatizer, algo_config, observer);
  } else {
    run_private_ucb_vi(env, *privatizer, algo_config, observer);
  }
  return curve;
}

json config_to_json(const ExperimentConfig& config) {
  json doc;
  doc["environment"] = config.environment;
  doc["algorithms"] = config.algorithms;
  doc["privatizers"] = config.privatizers;
  doc["epsilons"] = config.epsilons;
  doc["delta"] = config.delta;
  doc["episodes"] = config.episodes;
  doc["seeds"] = config.seeds;
  doc["base_seed"] = config.base_seed;
  doc["output_dir"] = config.output_dir;
  doc["plot"] = config.plot;
  doc["per_seed_csv"] = config.per_seed_csv;
  doc["bonus_scale"] = config.bonus_scale;
  doc["learning_rate"] = config.learning_rate;
  doc["jobs"] = config.jobs;
  return doc;
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  config.validate();
  const MdpSpec mdp = resolve_environment(config.environment);
  const OptimalSolution opt = optimal_values(mdp);

  RunContext ctx;
  ctx.mdp = &mdp;
  ctx.vstar = opt.values.value(0, mdp.initial_state);
  ctx.config = &config;

  const std::vector<RunGroup> groups = enumerate_groups(config);
  const int total_tasks = static_cast<int>(groups.size()) * config.seeds;

  const bool single_run = total_tasks == 1;
  if (!config.table_dump.empty() && !single_run) {
    throw ConfigError("table_dump", "requires a single group and a single seed");
  }
  if (!config.noise_log.empty() && !single_run) {
    throw ConfigError("noise_log", "requires a single group and a single seed");
  }
  std::ofstream table_dump_stream;
  if (!config.table_dump.empty()) {
    table_dump_stream.open(config.table_dump);
    if (!table_dump_stream) {
      throw std::runtime_error("cannot open table dump '" + config.table_dump + "'");
    }
  }
  std::ofstream noise_log_stream;
  if (!config.noise_log.empty()) {
    noise_log_stream.open(config.noise_log);
    if (!noise_log_stream) {
      throw std::runtime_error("cannot open noise log '" + config.noise_log + "'");
    }
  }

  std::vector<std::vector<RegretCurve>> curves(groups.size());
  for (auto& slot : curves) {
    slot.resize(config.seeds);
  }

  std::atomic<int> next_task{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::string error_context;

  const auto worker = [&]() {
    for (;;) {
      const int task = next_task.fetch_add(1);
      if (task >= total_tasks) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;  // abort remaining work on failure
      }
      const int group_index = task / config.seeds;
      const int seed_index = task % config.seeds;
      try {
        curves[group_index][seed_index] = execute_run(
            ctx, groups[group_index], seed_index,
            table_dump_stream.is_open() ? &table_dump_stream : nullptr,
            noise_log_stream.is_open() ? &noise_log_stream : nullptr);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
          error_context = groups[group_index].id() + " seed " +
                          std::to_string(seed_index);
        }
        return;
      }
    }
  };

  int jobs = config.jobs > 0
                 ? config.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, total_tasks));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(jobs) - 1);
  for (int i = 1; i < jobs; ++i) {
    threads.emplace_back(worker);
  }
  worker();
  for (std::thread& t : threads) {
    t.join();
  }
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      throw std::runtime_error("run failed (" + error_context + "): " + e.what());
    }
  }

  fs::create_directories(config.output_dir);
  ExperimentOutput output;
  output.results.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    output.results.push_back(aggregate(groups[g], curves[g]));
    const fs::path csv_path = fs::path(config.output_dir) / (groups[g].id() + ".csv");
    write_csv(output.results.back(), csv_path.string());
    output.csv_paths.push_back(csv_path.string());
    if (config.per_seed_csv) {
      for (int i = 0; i < config.seeds; ++i) {
        const fs::path seed_path =
            fs::path(config.output_dir) /
            (groups[g].id() + "_seed" + std::to_string(i) + ".csv");
        write_seed_csv(curves[g][i], seed_path.string());
      }
    }
  }

  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_to_json(config);
  json group_ids = json::array();
  for (const RunGroup& group : groups) {
    group_ids.push_back(group.id());
  }
  manifest["groups"] = std::move(group_ids);
  const fs::path manifest_path = fs::path(config.output_dir) / "manifest.json";
  {
    std::ofstream out(manifest_path);
    if (!out) {
      throw std::runtime_error("cannot write manifest '" + manifest_path.string() + "'");
    }
    out << manifest.dump(2) << '\n';
  }
  output.manifest_path = manifest_path.string();

  if (config.plot) {
    const fs::path plot_path = fs::path(config.output_dir) / "regret_curves.svg";
    emit_plot(output.results, plot_path.string());
    output.plot_path = plot_path.string();
  }
  return output;
}

}  // namespace dprl
