#ifndef SAGA_SIM_SIMULATION_HPP
#define SAGA_SIM_SIMULATION_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "saga/param_space.hpp"
#include "saga/rng.hpp"
#include "saga/sim/cell.hpp"
#include "saga/sim/microenvironment.hpp"
#include "saga/sim/sim_config.hpp"

namespace saga::sim {

struct SimState {
  SimConfig cfg;
  TherapyParams therapy;  // consulted when therapy cells are created
  Microenvironment env;
  std::vector<Cell> cells;
  double time = 0.0;             // minutes
  long long diffusion_steps = 0; // for instability reports

  // Reused workspaces; contents are meaningless between steps.
  std::array<std::vector<double>, Microenvironment::kFieldCount> src_driven;
  std::array<std::vector<double>, Microenvironment::kFieldCount> src_loss;
  std::vector<double> velocities;
  std::vector<int> bin_head, bin_next;
};

struct CountSample {
  double time = 0.0;
  int tumour = 0;
  int workers = 0;
  int cargo = 0;
};

struct SimOutcome {
  int tumour_cell_count = 0;  // alive tumour cells at termination
  std::vector<CountSample> counts;
  std::uint64_t seed = 0;
  double wall_time_seconds = 0.0;
};

/// Oxygen at the far-field value, signals and drug zero, tumour cells
/// hex-packed inside the configured disc. Throws ConfigError when the disc
/// does not fit the domain.
SimState init_state(const SimConfig& cfg, Rng& rng);

/// Adds round(n * worker_fraction) workers and the remainder cargo, placed
/// uniformly in the annulus around the tumour and clipped to the domain.
/// Worker interaction strengths come from state.therapy.
void inject_therapy(SimState& state, int n, double worker_fraction, Rng& rng);

/// Cell sources and sinks, decay, then implicit diffusion, for one dt.
void step_microenvironment(SimState& state, double dt);

/// Pairwise adhesion/repulsion, attachment springs, and motility, integrated
/// by one overdamped forward Euler step; cells stay inside the domain.
void step_mechanics(SimState& state, double dt);

/// Worker repolarization, the c1 motility shutdown, worker-cargo attachment
/// (nearest-first, ties by index), and oxygen-triggered cargo release.
void step_motility_and_adhesion(SimState& state, const TherapyParams& params,
                                const SimConfig& cfg, double dt, Rng& rng);

/// Tumour drug damage, drug and hypoxia death, oxygen-gated division, and
/// cargo apoptosis. Dead cells are removed and attachments remapped.
void step_biology(SimState& state, const SimConfig& cfg, double dt, Rng& rng);

/// Called every cfg.snapshot_interval of simulated time, plus once right
/// after initialization and once at the end.
using SimObserver = std::function<void(const SimState&)>;

/// Growth phase, injection, treatment phase. Deterministic in (cfg, params,
/// seed) apart from wall_time_seconds.
SimOutcome run_simulation(const SimConfig& cfg, const TherapyParams& params,
                          std::uint64_t seed,
                          const SimObserver& observer = {});

/// The simulator as an optimization objective: denormalizes the genotype,
/// runs one simulation, and returns the final count (alive tumour cells, or
/// every alive cell when cfg.count_all_cells is set).
std::function<double(const Genotype&, std::uint64_t)> objective_adapter(
    const SimConfig& cfg);

}  // namespace saga::sim

#endif
