#include "dprl/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dprl/harness.hpp"
#include "dprl/mdp.hpp"

namespace dprl {

namespace {

const char* env_output_dir() { return std::getenv("DPRL_OUT"); }

void print_output(const ExperimentOutput& output) {
  for (const AggregateResult& result : output.results) {
    std::cout << "group " << result.group_id << ": final mean regret "
              << format_double(result.mean_cumulative.back()) << " ("
              << result.seeds << " seeds)\n";
  }
  for (const std::string& path : output.csv_paths) {
    std::cout << "wrote " << path << '\n';
  }
  std::cout << "wrote " << output.manifest_path << '\n';
  if (!output.plot_path.empty()) {
    std::cout << "wrote " << output.plot_path << '\n';
  }
}

struct RunOverrides {
  std::string out_dir;
  std::int64_t episodes = 0;
  int seeds = 0;
  std::uint64_t base_seed = 0;
  int jobs = -1;
  double bonus_scale = -1.0;
  double learning_rate = -1.0;
  int plot = -1;  // -1 keep, 0 off, 1 on
  std::string table_dump;
  std::string noise_log;
  bool has_episodes = false;
  bool has_seeds = false;
  bool has_base_seed = false;
};

int do_run(const std::string& config_path, const RunOverrides& overrides) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config '" << config_path << "'\n";
    return 2;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  ExperimentConfig config = config_from_json_text(text);

  if (!overrides.out_dir.empty()) {
    config.output_dir = overrides.out_dir;
  } else if (!nlohmann::json::parse(text).contains("output_dir")) {
    if (const char* fallback = env_output_dir()) {
      config.output_dir = fallback;
    }
  }
  if (overrides.has_episodes) config.episodes = overrides.episodes;
  if (overrides.has_seeds) config.seeds = overrides.seeds;
  if (overrides.has_base_seed) config.base_seed = overrides.base_seed;
  if (overrides.jobs >= 0) config.jobs = overrides.jobs;
  if (overrides.bonus_scale >= 0.0) config.bonus_scale = overrides.bonus_scale;
  if (overrides.learning_rate >= 0.0) config.learning_rate = overrides.learning_rate;
  if (overrides.plot >= 0) config.plot = overrides.plot != 0;
  if (!overrides.table_dump.empty()) config.table_dump = overrides.table_dump;
  if (!overrides.noise_log.empty()) config.noise_log = overrides.noise_log;

  print_output(run_experiment(config));
  return 0;
}

int do_quick(const std::string& out_dir, int jobs) {
  ExperimentConfig config;
  config.environment = "riverswim";
  config.algorithms = {"po", "vi"};
  config.privatizers = {"identity", "central", "local"};
  config.epsilons = {2.0};
  config.episodes = 300;
  config.seeds = 2;
  config.base_seed = 7;
  config.bonus_scale = 0.1;
  config.output_dir = out_dir;
  config.jobs = jobs;
  print_output(run_experiment(config));
  return 0;
}

int do_validate(const std::string& mdp_path) {
  const MdpSpec mdp = load_mdp(mdp_path);
  std::cout << "ok: " << mdp_path << " (states " << mdp.num_states
            << ", actions " << mdp.num_actions << ", horizon " << mdp.horizon
            << ")\n";
  return 0;
}

int do_plot(const std::vector<std::string>& csv_paths, const std::string& out_path) {
  std::vector<PlotSeries> series;
  series.reserve(csv_paths.size());
  for (const std::string& path : csv_paths) {
    series.push_back(read_series_csv(path));
  }
  emit_plot(series, out_path);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for differentially private episodic RL"};
  app.require_subcommand(1);

  std::string config_path;
  RunOverrides overrides;
  CLI::App* run = app.add_subcommand("run", "Run a sweep from a JSON config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  CLI::Option* out_opt = run->add_option("--out", overrides.out_dir, "output directory");
  CLI::Option* episodes_opt =
      run->add_option("--episodes", overrides.episodes, "episodes per run");
  CLI::Option* seeds_opt = run->add_option("--seeds", overrides.seeds, "seeds per group");
  CLI::Option* base_seed_opt =
      run->add_option("--base-seed", overrides.base_seed, "first seed of the sweep");
  run->add_option("--jobs", overrides.jobs, "worker threads (0 = all cores)");
  run->add_option("--bonus-scale", overrides.bonus_scale,
                  "multiplier on the confidence widths");
  run->add_option("--learning-rate", overrides.learning_rate,
                  "policy update step size (0 = default)");
  bool plot_flag = true;
  CLI::Option* plot_opt = run->add_flag("--plot,!--no-plot", plot_flag, "write the SVG plot");
  run->add_option("--dump-tables", overrides.table_dump,
                  "write per-episode count/bonus tables (single run only)");
  run->add_option("--noise-log", overrides.noise_log,
                  "write the central noise audit log (single run only)");

  std::string quick_out =
      env_output_dir() != nullptr ? env_output_dir() : "results/quick";
  int quick_jobs = 0;
  CLI::App* quick = app.add_subcommand("quick", "Small built-in smoke sweep");
  quick->add_option("--out", quick_out, "output directory");
  quick->add_option("--jobs", quick_jobs, "worker threads (0 = all cores)");

  std::string mdp_path;
  CLI::App* validate = app.add_subcommand("validate", "Check an MDP JSON file");
  validate->add_option("mdp", mdp_path, "MDP file (JSON)")->required();

  std::vector<std::string> plot_inputs;
  std::string plot_out = "regret_curves.svg";
  CLI::App* plot = app.add_subcommand("plot", "Re-plot regret CSVs");
  plot->add_option("csv", plot_inputs, "aggregate or per-seed CSV files")
      ->required()
      ->expected(-1);
  plot->add_option("--out", plot_out, "output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      overrides.has_episodes = episodes_opt->count() > 0;
      overrides.has_seeds = seeds_opt->count() > 0;
      overrides.has_base_seed = base_seed_opt->count() > 0;
      if (out_opt->count() == 0) overrides.out_dir.clear();
      if (plot_opt->count() > 0) overrides.plot = plot_flag ? 1 : 0;
      return do_run(config_path, overrides);
    }
    if (*quick) return do_quick(quick_out, quick_jobs);
    if (*validate) return do_validate(mdp_path);
    if (*plot) return do_plot(plot_inputs, plot_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace dprl
