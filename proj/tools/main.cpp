// Command-line front-end: run one optimization against the simulator,
// compare two finished runs, or export plot-ready tables.
#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "saga/errors.hpp"
#include "saga/experiment.hpp"
#include "saga/run_io.hpp"

namespace {

std::filesystem::path default_output_dir(const saga::ExperimentConfig& cfg) {
  const char* root = std::getenv("SAGA_OUTPUT_ROOT");
  return std::filesystem::path(root ? root : "runs") /
         (to_string(cfg.algorithm) + "-seed" + std::to_string(cfg.run_seed));
}

int run_command(const std::string& config_file,
                const std::vector<std::pair<std::string, std::string>>&
                    overrides,
                bool output_given) {
  saga::ExperimentConfig cfg =
      config_file.empty() ? saga::parse_config(overrides)
                          : saga::parse_config(config_file, overrides);
  if (!output_given && config_file.empty()) {
    cfg.output_dir = default_output_dir(cfg);
  }
  saga::validate_experiment(cfg);
  const saga::RunResult result = saga::cmd_run(cfg);
  const saga::ArchiveRecord& best =
      result.archive[saga::best_record_index(result.archive)];
  std::cout << result.algorithm << " seed " << result.run_seed << ": "
            << result.archive.size() << " evaluations, best mean fitness "
            << saga::format_double(best.mean_fitness) << " (evaluation "
            << best.evaluation_index << ")\n"
            << "artifacts written to " << cfg.output_dir.string() << '\n';
  if (result.model_failures > 0)
    std::cout << "note: " << result.model_failures
              << " surrogate refit(s) failed and kept the previous model\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate-assisted evolution of simulated drug delivery"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Optimize and write run artifacts");
  std::string config_file;
  std::string algorithm, output;
  std::uint64_t seed = 0;
  int budget = 0, k = 0, population = 0, pool = 0, parallel = 0;
  std::vector<std::string> sets;
  run->add_option("--config", config_file, "key = value settings file");
  run->add_option("--algorithm", algorithm, "ga, saga-gp, or saga-mlp");
  run->add_option("--seed", seed, "run seed; all randomness flows from it");
  run->add_option("--budget", budget, "total candidate evaluations");
  run->add_option("--k", k, "fitness replicates per candidate");
  run->add_option("--population", population, "population size");
  run->add_option("--pool", pool, "offspring rated per pre-selection round");
  run->add_option("--parallel", parallel, "replicate thread cap");
  run->add_option("--output", output,
                  "output directory (default $SAGA_OUTPUT_ROOT/<algo>-seed<n>)");
  run->add_option("--set", sets, "extra KEY=VALUE override, repeatable");

  // compare
  auto* compare =
      app.add_subcommand("compare", "Rank-sum test between two runs' bests");
  std::vector<std::string> compare_runs;
  compare->add_option("runs", compare_runs, "two run directories")
      ->expected(2);

  // scatter
  auto* scatter =
      app.add_subcommand("scatter", "Export per-parameter scatter tables");
  std::vector<std::string> scatter_runs;
  std::string scatter_out = "scatter";
  scatter->add_option("runs", scatter_runs, "run directories");
  scatter->add_option("--output", scatter_out, "table output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::vector<std::pair<std::string, std::string>> overrides;
      for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw saga::ConfigError("--set expects KEY=VALUE, got \"" + kv +
                                  "\"");
        overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (run->count("--algorithm")) overrides.emplace_back("algorithm", algorithm);
      if (run->count("--seed"))
        overrides.emplace_back("run_seed", std::to_string(seed));
      if (run->count("--budget"))
        overrides.emplace_back("budget", std::to_string(budget));
      if (run->count("--k"))
        overrides.emplace_back("replicates", std::to_string(k));
      if (run->count("--population"))
        overrides.emplace_back("population_size", std::to_string(population));
      if (run->count("--pool"))
        overrides.emplace_back("pool_size", std::to_string(pool));
      if (run->count("--parallel"))
        overrides.emplace_back("parallel_replicates",
                               std::to_string(parallel));
      if (run->count("--output")) overrides.emplace_back("output_dir", output);
      return run_command(config_file, overrides, run->count("--output") > 0);
    }
    if (compare->parsed()) {
      const saga::CompareReport report =
          saga::cmd_compare(compare_runs[0], compare_runs[1]);
      std::cout << saga::to_text(report, compare_runs[0], compare_runs[1]);
      return 0;
    }
    if (scatter->parsed()) {
      if (scatter_runs.empty()) {
        std::cerr << "warning: no runs given, nothing to export\n";
        return 0;
      }
      std::vector<std::filesystem::path> runs(scatter_runs.begin(),
                                              scatter_runs.end());
      const auto written = saga::cmd_scatter(runs, scatter_out);
      for (const auto& path : written) std::cout << path.string() << '\n';
      return 0;
    }
  } catch (const saga::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const saga::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
