#ifndef SAGA_EXPERIMENT_HPP
#define SAGA_EXPERIMENT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "saga/evolution.hpp"
#include "saga/sim/simulation.hpp"
#include "saga/stats.hpp"

namespace saga {

/// Everything one optimization run needs: which algorithm, its evolution
/// settings, the simulator that serves as the objective, and the seed that
/// all randomness flows from.
struct ExperimentConfig {
  SurrogateKind algorithm = SurrogateKind::none;
  EvolutionConfig evolution;
  sim::SimConfig simulator;
  std::uint64_t run_seed = 1;
  std::filesystem::path output_dir = "runs/out";
};

/// The flat key = value views of ExperimentConfig. Every key is both
/// readable (for the config echo) and writable (from file or flag), so a
/// run's config echo is itself a valid config file that reproduces the run.
std::vector<std::string> config_key_names();
std::string config_get(const ExperimentConfig& cfg, const std::string& key);
/// Throws ConfigError on an unknown key or an unparseable value.
void config_set(ExperimentConfig& cfg, const std::string& key,
                const std::string& value);

/// Flat snapshot of the whole config in declaration order, defaults
/// included.
std::vector<std::pair<std::string, std::string>> config_snapshot(
    const ExperimentConfig& cfg);

/// Reads a key = value file into cfg (later keys win), then applies
/// overrides in order. Validation is deferred to validate_experiment so
/// flag overrides can land first.
ExperimentConfig parse_config(
    const std::filesystem::path& file,
    const std::vector<std::pair<std::string, std::string>>& overrides);
ExperimentConfig parse_config(
    const std::vector<std::pair<std::string, std::string>>& overrides);

/// Cross-module validation; throws ConfigError naming the offending key.
void validate_experiment(const ExperimentConfig& cfg);

/// Adapts the simulator to the evolution Objective: each replicate's
/// generator contributes one seed draw, so fitness depends only on
/// (genotype, replicate seed).
Objective make_sim_objective(const sim::SimConfig& cfg);

/// Validates, runs the configured algorithm against the simulator, writes
/// archive.csv, best_trace.csv, summary.txt and config_echo.txt under
/// cfg.output_dir, and returns the in-memory result.
RunResult cmd_run(const ExperimentConfig& cfg);

/// Statistical comparison of two runs' best candidates.
struct CompareReport {
  SampleSummary a;
  SampleSummary b;
  double best_mean_a = 0.0;
  double best_mean_b = 0.0;
  WilcoxonResult test;
  bool significant = false;  // at alpha = 0.05
};

/// Reads both archives, compares the k replicate samples of each run's best
/// candidate with the two-sided rank-sum test. Throws DataError when either
/// archive is missing or malformed.
CompareReport cmd_compare(const std::filesystem::path& run_a,
                          const std::filesystem::path& run_b);

/// Multi-line human-readable rendering of a CompareReport.
std::string to_text(const CompareReport& report, const std::string& label_a,
                    const std::string& label_b);

/// Emits plot-ready tables under out_dir: one scatter_<parameter>.csv per
/// evolved parameter (physical value, mean fitness, algorithm) pooling all
/// evaluations of all runs, plus one trace_<i>.csv per run. Returns the
/// files written; an empty run list writes nothing.
std::vector<std::filesystem::path> cmd_scatter(
    const std::vector<std::filesystem::path>& runs,
    const std::filesystem::path& out_dir);

}  // namespace saga

#endif
