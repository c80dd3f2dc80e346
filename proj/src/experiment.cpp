#include "saga/experiment.hpp"

#include <cerrno>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "saga/errors.hpp"
#include "saga/run_io.hpp"

namespace saga {
namespace {

double to_dbl(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const DataError&) {
    throw ConfigError(key + ": expected a number, got \"" + value + "\"");
  }
}

long long to_ll(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError(key + ": expected an integer, got \"" + value + "\"");
  return x;
}

int to_int(const std::string& key, const std::string& value) {
  const long long x = to_ll(key, value);
  if (x < INT_MIN || x > INT_MAX)
    throw ConfigError(key + ": value out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key + ": expected true or false, got \"" + value + "\"");
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE ||
      value.find('-') != std::string::npos)
    throw ConfigError(key + ": expected an unsigned integer, got \"" + value +
                      "\"");
  return x;
}

struct Binding {
  const char* key;
  std::string (*get)(const ExperimentConfig&);
  void (*set)(ExperimentConfig&, const std::string&);
};

#define KEY_DOUBLE(name, field)                                       \
  {name, [](const ExperimentConfig& c) { return format_double(c.field); }, \
   [](ExperimentConfig& c, const std::string& v) { c.field = to_dbl(name, v); }}
#define KEY_INT(name, field)                                              \
  {name, [](const ExperimentConfig& c) { return std::to_string(c.field); }, \
   [](ExperimentConfig& c, const std::string& v) { c.field = to_int(name, v); }}
#define KEY_BOOL(name, field)                                            \
  {name,                                                                 \
   [](const ExperimentConfig& c) {                                       \
     return std::string(c.field ? "true" : "false");                     \
   },                                                                    \
   [](ExperimentConfig& c, const std::string& v) { c.field = to_bool(name, v); }}

const Binding kBindings[] = {
    {"algorithm",
     [](const ExperimentConfig& c) { return to_string(c.algorithm); },
     [](ExperimentConfig& c, const std::string& v) {
       c.algorithm = surrogate_from_string(v);
     }},
    {"run_seed",
     [](const ExperimentConfig& c) { return std::to_string(c.run_seed); },
     [](ExperimentConfig& c, const std::string& v) {
       c.run_seed = to_u64("run_seed", v);
     }},
    {"output_dir",
     [](const ExperimentConfig& c) { return c.output_dir.string(); },
     [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }},
    KEY_INT("budget", evolution.budget),
    KEY_INT("replicates", evolution.replicates),
    KEY_INT("population_size", evolution.population_size),
    KEY_INT("pool_size", evolution.pool_size),
    KEY_INT("tournament_size", evolution.tournament_size),
    KEY_DOUBLE("crossover_probability", evolution.crossover_probability),
    {"mutation_probability",
     [](const ExperimentConfig& c) {
       return format_double(
           c.evolution.mutation_probability
               ? *c.evolution.mutation_probability
               : 1.0 / static_cast<double>(c.evolution.dimensions));
     },
     [](ExperimentConfig& c, const std::string& v) {
       c.evolution.mutation_probability = to_dbl("mutation_probability", v);
     }},
    KEY_DOUBLE("mutation_step", evolution.mutation_step),
    KEY_INT("refit_full_every", evolution.refit_full_every),
    KEY_INT("parallel_replicates", evolution.parallel_replicates),
    KEY_INT("gp_restarts", evolution.gp_options.restarts),
    KEY_INT("gp_max_iterations",
            evolution.gp_options.optimizer.max_iterations),
    KEY_INT("mlp_restarts", evolution.mlp_options.restarts),
    KEY_INT("mlp_hidden_units", evolution.mlp_options.hidden_units),
    KEY_INT("mlp_max_iterations",
            evolution.mlp_options.optimizer.max_iterations),
    KEY_DOUBLE("sim_max_attach_distance", simulator.max_attach_distance),
    KEY_DOUBLE("sim_min_attach_distance", simulator.min_attach_distance),
    KEY_DOUBLE("sim_worker_apoptosis_rate", simulator.worker_apoptosis_rate),
    KEY_DOUBLE("sim_worker_migration_speed",
               simulator.worker_migration_speed),
    KEY_DOUBLE("sim_worker_o2_uptake", simulator.worker_o2_uptake),
    KEY_DOUBLE("sim_cargo_o2_uptake", simulator.cargo_o2_uptake),
    KEY_DOUBLE("sim_cargo_apoptosis_rate", simulator.cargo_apoptosis_rate),
    KEY_DOUBLE("sim_cargo_relative_adhesion",
               simulator.cargo_relative_adhesion),
    KEY_DOUBLE("sim_cargo_relative_repulsion",
               simulator.cargo_relative_repulsion),
    KEY_DOUBLE("sim_damage_rate", simulator.damage_rate),
    KEY_DOUBLE("sim_repair_rate", simulator.repair_rate),
    KEY_DOUBLE("sim_drug_death_rate", simulator.drug_death_rate),
    KEY_DOUBLE("sim_max_relative_adhesion_distance",
               simulator.max_relative_adhesion_distance),
    KEY_DOUBLE("sim_elastic_coefficient", simulator.elastic_coefficient),
    KEY_DOUBLE("sim_max_elastic_displacement",
               simulator.max_elastic_displacement),
    KEY_DOUBLE("sim_motility_shutdown_threshold",
               simulator.motility_shutdown_threshold),
    KEY_DOUBLE("sim_attachment_receptor_threshold",
               simulator.attachment_receptor_threshold),
    KEY_DOUBLE("sim_domain_half_width", simulator.domain_half_width),
    KEY_DOUBLE("sim_dx", simulator.dx),
    KEY_DOUBLE("sim_dt_diffusion", simulator.dt_diffusion),
    KEY_DOUBLE("sim_dt_mechanics", simulator.dt_mechanics),
    KEY_DOUBLE("sim_dt_biology", simulator.dt_biology),
    KEY_DOUBLE("sim_growth_duration", simulator.growth_duration),
    KEY_DOUBLE("sim_treatment_duration", simulator.treatment_duration),
    KEY_DOUBLE("sim_tumour_radius", simulator.tumour_radius),
    KEY_INT("sim_injected_cells", simulator.injected_cells),
    KEY_DOUBLE("sim_worker_fraction", simulator.worker_fraction),
    KEY_DOUBLE("sim_cell_radius", simulator.cell_radius),
    KEY_DOUBLE("sim_hex_spacing_factor", simulator.hex_spacing_factor),
    KEY_DOUBLE("sim_injection_inner_gap", simulator.injection_inner_gap),
    KEY_DOUBLE("sim_injection_outer_gap", simulator.injection_outer_gap),
    KEY_DOUBLE("sim_oxygen_far_field", simulator.oxygen_far_field),
    KEY_DOUBLE("sim_oxygen_diffusion", simulator.oxygen_diffusion),
    KEY_DOUBLE("sim_oxygen_decay", simulator.oxygen_decay),
    KEY_DOUBLE("sim_signal_diffusion", simulator.signal_diffusion),
    KEY_DOUBLE("sim_signal_decay", simulator.signal_decay),
    KEY_DOUBLE("sim_tumour_o2_uptake", simulator.tumour_o2_uptake),
    KEY_DOUBLE("sim_tumour_c1_secretion", simulator.tumour_c1_secretion),
    KEY_DOUBLE("sim_cargo_c2_secretion", simulator.cargo_c2_secretion),
    KEY_DOUBLE("sim_drug_secretion", simulator.drug_secretion),
    KEY_DOUBLE("sim_tumour_relative_adhesion",
               simulator.tumour_relative_adhesion),
    KEY_DOUBLE("sim_tumour_relative_repulsion",
               simulator.tumour_relative_repulsion),
    KEY_DOUBLE("sim_hypoxia_death_threshold",
               simulator.hypoxia_death_threshold),
    KEY_DOUBLE("sim_hypoxia_survival_window",
               simulator.hypoxia_survival_window),
    KEY_DOUBLE("sim_division_o2_threshold", simulator.division_o2_threshold),
    KEY_DOUBLE("sim_division_base_rate", simulator.division_base_rate),
    KEY_BOOL("sim_count_all_cells", simulator.count_all_cells),
    KEY_DOUBLE("sim_snapshot_interval", simulator.snapshot_interval),
};

#undef KEY_DOUBLE
#undef KEY_INT
#undef KEY_BOOL

const Binding& find_binding(const std::string& key) {
  for (const Binding& b : kBindings)
    if (key == b.key) return b;
  throw ConfigError("unknown configuration key \"" + key + "\"");
}

/// Directory layout if given a directory, otherwise the file itself.
std::filesystem::path archive_file(const std::filesystem::path& run) {
  return std::filesystem::is_directory(run) ? run_paths(run).archive : run;
}

std::string algorithm_label(const std::filesystem::path& run) {
  if (!std::filesystem::is_directory(run)) return "unknown";
  for (const auto& [key, value] : read_key_values(run_paths(run).summary))
    if (key == "algorithm") return value;
  return "unknown";
}

}  // namespace

std::vector<std::string> config_key_names() {
  std::vector<std::string> names;
  for (const Binding& b : kBindings) names.emplace_back(b.key);
  return names;
}

std::string config_get(const ExperimentConfig& cfg, const std::string& key) {
  return find_binding(key).get(cfg);
}

void config_set(ExperimentConfig& cfg, const std::string& key,
                const std::string& value) {
  find_binding(key).set(cfg, value);
}

std::vector<std::pair<std::string, std::string>> config_snapshot(
    const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> entries;
  for (const Binding& b : kBindings) entries.emplace_back(b.key, b.get(cfg));
  return entries;
}

ExperimentConfig parse_config(
    const std::filesystem::path& file,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : read_key_values(file))
    config_set(cfg, key, value);
  for (const auto& [key, value] : overrides) config_set(cfg, key, value);
  return cfg;
}

ExperimentConfig parse_config(
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : overrides) config_set(cfg, key, value);
  return cfg;
}

void validate_experiment(const ExperimentConfig& cfg) {
  EvolutionConfig evo = cfg.evolution;
  evo.surrogate = cfg.algorithm;
  validate(evo);
  sim::validate(cfg.simulator);
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

Objective make_sim_objective(const sim::SimConfig& cfg) {
  auto objective = sim::objective_adapter(cfg);
  return [objective](const Genotype& genotype, Rng& rng) {
    return objective(genotype, rng.next_u64());
  };
}

RunResult cmd_run(const ExperimentConfig& cfg) {
  ExperimentConfig local = cfg;
  local.evolution.surrogate = local.algorithm;
  local.evolution.parallel_replicates = cfg.evolution.parallel_replicates;
  validate_experiment(local);
  std::filesystem::create_directories(local.output_dir);

  RunResult result = run_evolution(
      local.evolution, make_sim_objective(local.simulator), local.run_seed);

  const RunPaths paths = run_paths(local.output_dir);
  write_archive_csv(paths.archive, result.archive);
  write_best_trace_csv(paths.best_trace, result.best_trace);
  write_summary(paths.summary, result);
  write_key_values(paths.config_echo, config_snapshot(local));
  return result;
}

CompareReport cmd_compare(const std::filesystem::path& run_a,
                          const std::filesystem::path& run_b) {
  const Archive a = read_archive_csv(archive_file(run_a));
  const Archive b = read_archive_csv(archive_file(run_b));
  const ArchiveRecord& best_a = a[best_record_index(a)];
  const ArchiveRecord& best_b = b[best_record_index(b)];

  CompareReport report;
  report.a = summarize(best_a.samples);
  report.b = summarize(best_b.samples);
  report.best_mean_a = best_a.mean_fitness;
  report.best_mean_b = best_b.mean_fitness;
  report.test = wilcoxon_rank_sum(best_a.samples, best_b.samples);
  report.significant = report.test.p_two_sided <= 0.05;
  return report;
}

std::string to_text(const CompareReport& report, const std::string& label_a,
                    const std::string& label_b) {
  std::ostringstream out;
  const auto describe = [&out](const std::string& label,
                               const SampleSummary& s, double best_mean) {
    out << label << ": best mean fitness " << format_double(best_mean)
        << " over " << s.n << " replicates\n"
        << "  mean=" << format_double(s.mean) << " sd=" << format_double(s.sd)
        << " min=" << format_double(s.min)
        << " median=" << format_double(s.median) << " kurtosis="
        << (s.excess_kurtosis ? format_double(*s.excess_kurtosis)
                              : std::string("undefined"))
        << '\n';
  };
  describe(label_a, report.a, report.best_mean_a);
  describe(label_b, report.b, report.best_mean_b);
  out << "rank-sum statistic " << format_double(report.test.statistic)
      << ", two-sided p = " << format_double(report.test.p_two_sided) << " ("
      << (report.test.exact ? "exact" : "normal approximation") << ")\n"
      << "verdict at alpha 0.05: "
      << (report.significant ? "significant" : "not significant") << '\n';
  return out.str();
}

std::vector<std::filesystem::path> cmd_scatter(
    const std::vector<std::filesystem::path>& runs,
    const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;
  if (runs.empty()) return written;

  struct Loaded {
    Archive archive;
    std::vector<double> trace;
    std::string label;
  };
  std::vector<Loaded> loaded;
  const std::vector<ParameterSpec>& space = canonical_space();
  for (const auto& run : runs) {
    Loaded l;
    l.archive = read_archive_csv(archive_file(run));
    for (const ArchiveRecord& rec : l.archive)
      if (rec.genotype.size() != space.size())
        throw DataError(archive_file(run).string() + ": genotype has " +
                        std::to_string(rec.genotype.size()) +
                        " genes, expected " + std::to_string(space.size()));
    if (std::filesystem::is_directory(run)) {
      l.trace = read_best_trace_csv(run_paths(run).best_trace);
      l.label = algorithm_label(run);
    } else {
      for (const ArchiveRecord& rec : l.archive) {
        const double mean = rec.mean_fitness;
        l.trace.push_back(l.trace.empty() ? mean
                                          : std::min(l.trace.back(), mean));
      }
      l.label = "unknown";
    }
    loaded.push_back(std::move(l));
  }

  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const std::filesystem::path path =
        out_dir / ("scatter_" + space[i].name + ".csv");
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << space[i].name << ",mean_fitness,algorithm\n";
    for (const Loaded& l : loaded)
      for (const ArchiveRecord& rec : l.archive)
        out << format_double(denormalize(rec.genotype, space)[i]) << ','
            << format_double(rec.mean_fitness) << ',' << l.label << '\n';
    if (!out) throw DataError("write failed for " + path.string());
    written.push_back(path);
  }
  for (std::size_t r = 0; r < loaded.size(); ++r) {
    const std::filesystem::path path =
        out_dir / ("trace_" + std::to_string(r) + ".csv");
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "evaluation_index,best_mean_fitness,algorithm\n";
    for (std::size_t i = 0; i < loaded[r].trace.size(); ++i)
      out << i << ',' << format_double(loaded[r].trace[i]) << ','
          << loaded[r].label << '\n';
    if (!out) throw DataError("write failed for " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace saga
