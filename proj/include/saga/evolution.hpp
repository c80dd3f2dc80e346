#ifndef SAGA_EVOLUTION_HPP
#define SAGA_EVOLUTION_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "saga/acquisition.hpp"
#include "saga/archive.hpp"
#include "saga/param_space.hpp"
#include "saga/rng.hpp"

namespace saga {

enum class SurrogateKind { none, gp, mlp };

/// "ga", "saga-gp", "saga-mlp".
std::string to_string(SurrogateKind kind);
/// Inverse of to_string; throws ConfigError on anything else.
SurrogateKind surrogate_from_string(const std::string& name);

struct EvolutionConfig {
  int dimensions = 6;
  int population_size = 20;
  /// Fitness samples averaged per candidate.
  int replicates = 10;
  /// Offspring rated per pre-selection round (ignored without a surrogate).
  int pool_size = 1000;
  /// Total candidates evaluated, the initial population included.
  int budget = 200;
  double crossover_probability = 0.8;
  /// Per-gene mutation probability; defaults to 1/dimensions.
  std::optional<double> mutation_probability;
  /// Half-width of the uniform mutation step, in normalized units.
  double mutation_step = 0.1;
  int tournament_size = 3;
  SurrogateKind surrogate = SurrogateKind::none;
  /// Every refit_full_every-th refit reruns the restart search; the others
  /// warm-start from the previous solution. 1 means every refit is full.
  int refit_full_every = 10;
  GpFitOptions gp_options;
  MlpFitOptions mlp_options;
  /// Thread cap for a candidate's replicate evaluations; 1 runs them inline.
  /// The result is identical at any width; replicate seeds do not depend on
  /// scheduling.
  int parallel_replicates = 1;
  /// Receives refit-failure notices; stderr when empty.
  std::function<void(const std::string&)> on_warning;
};

struct Individual {
  Genotype genotype;
  double fitness = 0.0;  // mean over replicates
  int evaluation_index = 0;
};

struct RunResult {
  Archive archive;
  /// Running best mean fitness, one entry per evaluation.
  std::vector<double> best_trace;
  std::vector<Individual> final_population;
  std::uint64_t run_seed = 0;
  std::string algorithm;
  double wall_time_seconds = 0.0;
  /// Refits that failed and kept the previous model.
  int model_failures = 0;
  /// Final fitted surrogate, e.g. "gp lengthscale=... signal_std=...
  /// noise_std=..."; empty for plain ga.
  std::string model_description;
};

/// Noisy objective. All randomness must come from the supplied generator,
/// which is seeded per replicate.
using Objective = std::function<double(const Genotype&, Rng&)>;

/// One fitness sample per replicate, each from a generator seeded by
/// (run_seed, evaluation_index, replicate). Failures are rethrown as
/// EvaluationError naming the replicate.
std::vector<double> evaluate_replicates(const Objective& objective,
                                        const Genotype& genotype,
                                        int replicates, std::uint64_t run_seed,
                                        int evaluation_index,
                                        int parallel_width);

/// Throws ConfigError naming the first invalid field.
void validate(const EvolutionConfig& cfg);

/// `count` distinct values from {0,...,n-1} via a partial shuffle.
std::vector<int> sample_distinct(Rng& rng, int count, int n);

/// Index of the lowest-fitness member of a random tournament; ties keep the
/// lowest population index.
int tournament_select(const std::vector<Individual>& population,
                      int tournament_size, Rng& rng);

/// Index of the highest-fitness member of a random tournament (the
/// replacement victim); ties keep the lowest population index.
int negative_tournament(const std::vector<Individual>& population,
                        int tournament_size, Rng& rng);

/// Each gene from either parent with probability one half.
Genotype uniform_crossover(const Genotype& a, const Genotype& b, Rng& rng);

/// Per-gene uniform step from [-step, step], applied with the given
/// probability and clamped to [-1, 1].
void mutate(Genotype& genotype, double probability, double step, Rng& rng);

/// Clone of parent1, crossed with parent2 with the configured probability,
/// then mutated.
Genotype make_offspring(const Genotype& parent1, const Genotype& parent2,
                        const EvolutionConfig& cfg, Rng& rng);

/// Index of the highest-rated candidate; ties keep the earliest.
std::size_t preselect_best(const std::vector<Genotype>& pool,
                           const SurrogateModel& model, double best_fitness);

/// Steady-state evolutionary run, with surrogate pre-selection when
/// cfg.surrogate is not none. Deterministic in (cfg, run_seed) apart from
/// wall_time_seconds.
RunResult run_evolution(const EvolutionConfig& cfg, const Objective& objective,
                        std::uint64_t run_seed);

}  // namespace saga

#endif
