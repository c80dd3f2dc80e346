#include "saga/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>

#include "saga/errors.hpp"

namespace saga {
namespace {

void warn(const EvolutionConfig& cfg, const std::string& msg) {
  if (cfg.on_warning)
    cfg.on_warning(msg);
  else
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

double effective_mutation_probability(const EvolutionConfig& cfg) {
  return cfg.mutation_probability
             ? *cfg.mutation_probability
             : 1.0 / static_cast<double>(cfg.dimensions);
}

/// Warm-start bookkeeping between refits.
struct SurrogateState {
  std::optional<SurrogateModel> model;
  std::optional<GpHyperparams> gp_warm;
  std::optional<std::vector<double>> mlp_warm;
  int refit_count = 0;
};

void refit_surrogate(SurrogateState& state, const EvolutionConfig& cfg,
                     const Archive& archive, Rng& model_rng, int& failures) {
  // Full restart searches on a fixed cadence; in between, a single
  // optimization warm-started from the previous solution tracks the slowly
  // growing archive at a fraction of the cost.
  const bool full = state.refit_count % cfg.refit_full_every == 0;
  ++state.refit_count;
  try {
    if (cfg.surrogate == SurrogateKind::gp) {
      GpFitOptions opts = cfg.gp_options;
      opts.warm_start = state.gp_warm;
      if (!full && state.gp_warm) opts.restarts = 0;
      GpModel m = gp_fit(archive, opts, model_rng);
      state.gp_warm = m.hp;
      state.model = std::move(m);
    } else {
      MlpFitOptions opts = cfg.mlp_options;
      opts.warm_start = state.mlp_warm;
      if (!full && state.mlp_warm) opts.restarts = 0;
      MlpModel m = mlp_fit(archive, opts, model_rng);
      state.mlp_warm = mlp_flatten(m);
      state.model = std::move(m);
    }
  } catch (const ModelError& e) {
    ++failures;
    warn(cfg, std::string("surrogate refit failed (") + e.what() +
                  "); keeping the previous model");
  }
}

}  // namespace

void validate(const EvolutionConfig& cfg) {
  if (cfg.dimensions < 1) throw ConfigError("dimensions must be at least 1");
  if (cfg.population_size < 2)
    throw ConfigError("population_size must be at least 2");
  if (cfg.tournament_size < 1 ||
      cfg.tournament_size > cfg.population_size)
    throw ConfigError("tournament_size must be in [1, population_size]");
  if (cfg.replicates < 1) throw ConfigError("replicates must be at least 1");
  if (cfg.pool_size < 1) throw ConfigError("pool_size must be at least 1");
  if (cfg.budget < cfg.population_size)
    throw ConfigError("budget must cover the initial population");
  if (cfg.crossover_probability < 0.0 || cfg.crossover_probability > 1.0)
    throw ConfigError("crossover_probability must be in [0,1]");
  if (cfg.mutation_probability &&
      (*cfg.mutation_probability < 0.0 || *cfg.mutation_probability > 1.0))
    throw ConfigError("mutation_probability must be in [0,1]");
  if (cfg.mutation_step < 0.0)
    throw ConfigError("mutation_step must be non-negative");
  if (cfg.refit_full_every < 1)
    throw ConfigError("refit_full_every must be at least 1");
  if (cfg.parallel_replicates < 1)
    throw ConfigError("parallel_replicates must be at least 1");
}

std::string to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::none: return "ga";
    case SurrogateKind::gp: return "saga-gp";
    case SurrogateKind::mlp: return "saga-mlp";
  }
  throw std::logic_error("unreachable");
}

SurrogateKind surrogate_from_string(const std::string& name) {
  if (name == "ga") return SurrogateKind::none;
  if (name == "saga-gp") return SurrogateKind::gp;
  if (name == "saga-mlp") return SurrogateKind::mlp;
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected ga, saga-gp, or saga-mlp)");
}

std::vector<double> evaluate_replicates(const Objective& objective,
                                        const Genotype& genotype,
                                        int replicates, std::uint64_t run_seed,
                                        int evaluation_index,
                                        int parallel_width) {
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  std::vector<double> samples(replicates);
  const auto run_one = [&](int r) {
    Rng rng(derive_seed(run_seed, kStreamReplicate,
                        static_cast<std::uint64_t>(evaluation_index),
                        static_cast<std::uint64_t>(r)));
    const double f = objective(genotype, rng);
    if (!std::isfinite(f))
      throw EvaluationError("objective returned a non-finite fitness", r);
    samples[r] = f;
  };
  const auto wrap = [](const std::exception& e, int r) {
    return EvaluationError(
        "replicate " + std::to_string(r) + " failed: " + e.what(), r);
  };

  const int width = std::clamp(parallel_width, 1, replicates);
  if (width == 1) {
    for (int r = 0; r < replicates; ++r) {
      try {
        run_one(r);
      } catch (const EvaluationError&) {
        throw;
      } catch (const std::exception& e) {
        throw wrap(e, r);
      }
    }
    return samples;
  }

  // Replicates r = t, t+width, ... on thread t. Seeds depend only on the
  // replicate index, so scheduling cannot change the result.
  std::vector<std::exception_ptr> errors(replicates);
  std::vector<std::thread> threads;
  threads.reserve(width);
  for (int t = 0; t < width; ++t) {
    threads.emplace_back([&, t] {
      for (int r = t; r < replicates; r += width) {
        try {
          run_one(r);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (int r = 0; r < replicates; ++r) {
    if (!errors[r]) continue;
    try {
      std::rethrow_exception(errors[r]);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw wrap(e, r);
    }
  }
  return samples;
}

std::vector<int> sample_distinct(Rng& rng, int count, int n) {
  if (count < 0 || count > n)
    throw std::invalid_argument("cannot sample " + std::to_string(count) +
                                " distinct values from " + std::to_string(n));
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    const int j = rng.uniform_int(i, n - 1);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

int tournament_select(const std::vector<Individual>& population,
                      int tournament_size, Rng& rng) {
  const std::vector<int> entrants = sample_distinct(
      rng, tournament_size, static_cast<int>(population.size()));
  int best = -1;
  for (int i : entrants) {
    if (best < 0 || population[i].fitness < population[best].fitness ||
        (population[i].fitness == population[best].fitness && i < best))
      best = i;
  }
  return best;
}

int negative_tournament(const std::vector<Individual>& population,
                        int tournament_size, Rng& rng) {
  const std::vector<int> entrants = sample_distinct(
      rng, tournament_size, static_cast<int>(population.size()));
  int worst = -1;
  for (int i : entrants) {
    if (worst < 0 || population[i].fitness > population[worst].fitness ||
        (population[i].fitness == population[worst].fitness && i < worst))
      worst = i;
  }
  return worst;
}

Genotype uniform_crossover(const Genotype& a, const Genotype& b, Rng& rng) {
  if (a.size() != b.size())
    throw std::invalid_argument("parents have different lengths");
  Genotype child(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    child[i] = rng.uniform() < 0.5 ? a[i] : b[i];
  return child;
}

void mutate(Genotype& genotype, double probability, double step, Rng& rng) {
  for (double& gene : genotype) {
    if (rng.uniform() < probability) {
      gene = std::clamp(gene + rng.uniform(-step, step), -1.0, 1.0);
    }
  }
}

Genotype make_offspring(const Genotype& parent1, const Genotype& parent2,
                        const EvolutionConfig& cfg, Rng& rng) {
  Genotype child;
  if (rng.uniform() < cfg.crossover_probability)
    child = uniform_crossover(parent1, parent2, rng);
  else
    child = parent1;
  mutate(child, effective_mutation_probability(cfg), cfg.mutation_step, rng);
  return child;
}

std::size_t preselect_best(const std::vector<Genotype>& pool,
                           const SurrogateModel& model, double best_fitness) {
  if (pool.empty()) throw std::invalid_argument("empty candidate pool");
  std::size_t arg = 0;
  double best_rating = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double r = rate_candidate(model, pool[i], best_fitness);
    if (r > best_rating) {  // strict: ties keep the earliest candidate
      best_rating = r;
      arg = i;
    }
  }
  return arg;
}

RunResult run_evolution(const EvolutionConfig& cfg, const Objective& objective,
                        std::uint64_t run_seed) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  Rng var_rng(derive_seed(run_seed, kStreamVariation));
  Rng model_rng(derive_seed(run_seed, kStreamModel));

  RunResult res;
  res.run_seed = run_seed;
  res.algorithm = to_string(cfg.surrogate);

  int next_eval = 0;
  double best = std::numeric_limits<double>::infinity();
  const auto evaluate_and_record = [&](Genotype g) {
    std::vector<double> samples =
        evaluate_replicates(objective, g, cfg.replicates, run_seed, next_eval,
                            cfg.parallel_replicates);
    const double mean_fitness =
        std::accumulate(samples.begin(), samples.end(), 0.0) /
        static_cast<double>(samples.size());
    res.archive.push_back({g, std::move(samples), mean_fitness, next_eval});
    best = std::min(best, mean_fitness);
    res.best_trace.push_back(best);
    Individual ind{std::move(g), mean_fitness, next_eval};
    ++next_eval;
    return ind;
  };

  std::vector<Individual> population;
  population.reserve(cfg.population_size);
  for (int i = 0; i < cfg.population_size; ++i)
    population.push_back(
        evaluate_and_record(random_genotype(var_rng, cfg.dimensions)));

  const bool use_surrogate = cfg.surrogate != SurrogateKind::none;
  SurrogateState surrogate;
  if (use_surrogate && next_eval < cfg.budget)
    refit_surrogate(surrogate, cfg, res.archive, model_rng,
                    res.model_failures);

  while (next_eval < cfg.budget) {
    Genotype child;
    if (!use_surrogate) {
      const Genotype& p1 =
          population[tournament_select(population, cfg.tournament_size,
                                       var_rng)].genotype;
      const Genotype& p2 =
          population[tournament_select(population, cfg.tournament_size,
                                       var_rng)].genotype;
      child = make_offspring(p1, p2, cfg, var_rng);
    } else if (surrogate.model) {
      // One parent pair per round; the pool holds M variations of it and the
      // model picks which one earns a real evaluation.
      const Genotype& p1 =
          population[tournament_select(population, cfg.tournament_size,
                                       var_rng)].genotype;
      const Genotype& p2 =
          population[tournament_select(population, cfg.tournament_size,
                                       var_rng)].genotype;
      std::vector<Genotype> pool(cfg.pool_size);
      for (Genotype& g : pool) g = make_offspring(p1, p2, cfg, var_rng);
      child = std::move(pool[preselect_best(pool, *surrogate.model, best)]);
    } else {
      // No model has ever fitted; spend the evaluation on a uniformly random
      // candidate rather than skewing the budget accounting.
      child = random_genotype(var_rng, cfg.dimensions);
    }
    Individual ind = evaluate_and_record(std::move(child));
    const int victim =
        negative_tournament(population, cfg.tournament_size, var_rng);
    population[victim] = std::move(ind);
    if (use_surrogate && next_eval < cfg.budget)
      refit_surrogate(surrogate, cfg, res.archive, model_rng,
                      res.model_failures);
  }

  res.final_population = std::move(population);
  if (surrogate.model) {
    char buf[160];
    if (const GpModel* gp = std::get_if<GpModel>(&*surrogate.model)) {
      std::snprintf(buf, sizeof buf,
                    "gp lengthscale=%.6g signal_std=%.6g noise_std=%.6g",
                    gp->hp.lengthscale, gp->hp.signal_std, gp->hp.noise_std);
    } else {
      const MlpModel& mlp = std::get<MlpModel>(*surrogate.model);
      std::snprintf(buf, sizeof buf, "mlp hidden=%d train_mse=%.6g",
                    static_cast<int>(mlp.b1.size()), mlp.train_mse);
    }
    res.model_description = buf;
  }
  res.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

}  // namespace saga
