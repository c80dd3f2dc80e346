#ifndef SAGA_SIM_SIM_CONFIG_HPP
#define SAGA_SIM_SIM_CONFIG_HPP

#include "saga/param_space.hpp"

namespace saga::sim {

/// Fixed multicellular model constants plus desk-scale controls. The first
/// block holds the published cell-interaction defaults; everything after it
/// is a modelling decision of this implementation and is echoed alongside
/// results so runs are fully reproducible from their output directory.
struct SimConfig {
  // Cell interaction and pharmacology constants.
  double max_attach_distance = 18.0;     // microns
  double min_attach_distance = 14.0;     // microns
  double worker_apoptosis_rate = 0.0;    // /min
  double worker_migration_speed = 2.0;   // microns/min
  double worker_o2_uptake = 0.1;         // /min
  double cargo_o2_uptake = 0.1;          // /min
  double cargo_apoptosis_rate = 4.065e-5;  // /min
  double cargo_relative_adhesion = 0.0;
  double cargo_relative_repulsion = 5.0;
  double damage_rate = 0.03333;          // /min per unit drug
  double repair_rate = 0.004167;         // /min
  double drug_death_rate = 0.004167;     // /min per unit damage
  double max_relative_adhesion_distance = 1.25;  // multiple of radii sum
  double elastic_coefficient = 0.05;     // /min
  double max_elastic_displacement = 50.0;  // microns per step cap
  double motility_shutdown_threshold = 0.001;   // c1 units
  double attachment_receptor_threshold = 0.1;   // c2 units

  // Desk-scale domain and schedule.
  double domain_half_width = 300.0;  // microns; domain is the centered square
  double dx = 20.0;                  // microns, voxel edge
  double dt_diffusion = 0.01;        // min
  double dt_mechanics = 0.1;         // min
  double dt_biology = 6.0;           // min
  double growth_duration = 720.0;    // min before the injection
  double treatment_duration = 360.0; // min after it
  double tumour_radius = 50.0;       // microns
  int injected_cells = 100;
  double worker_fraction = 0.1;

  // Geometry decisions.
  double cell_radius = 8.0;          // microns, all kinds
  double hex_spacing_factor = 0.95;  // lattice pitch = 2 r * factor
  double injection_inner_gap = 20.0;   // annulus starts at radius + this
  double injection_outer_gap = 100.0;  // and ends at radius + this

  // Transport decisions. Oxygen is held at the far-field value on the
  // boundary; the three secreted substrates use no-flux boundaries.
  double oxygen_far_field = 38.0;    // mmHg
  double oxygen_diffusion = 6000.0;  // microns^2/min
  double oxygen_decay = 0.02;        // /min
  double signal_diffusion = 1000.0;  // microns^2/min, c1 / c2 / drug
  double signal_decay = 0.01;        // /min

  // Source decisions: secretion drives a voxel toward saturation 1.
  double tumour_o2_uptake = 4.0;     // /min
  double tumour_c1_secretion = 1.0;  // /min
  double cargo_c2_secretion = 1.0;   // /min
  double drug_secretion = 0.5;       // /min

  // Tumour mechanics and fate decisions.
  double tumour_relative_adhesion = 0.4;
  double tumour_relative_repulsion = 10.0;
  double hypoxia_death_threshold = 5.0;    // mmHg
  double hypoxia_survival_window = 180.0;  // min below threshold before death
  double division_o2_threshold = 8.0;      // mmHg, no division below
  double division_base_rate = 0.00072;     // /min at far-field oxygen

  // Outcome accounting: count every alive cell instead of tumour cells only.
  bool count_all_cells = false;

  double snapshot_interval = 30.0;  // min, observer cadence
};

/// Throws ConfigError naming the offending field.
void validate(const SimConfig& cfg);

/// The six evolvable treatment controls.
struct TherapyParams {
  double attached_bias = 0.5;        // [0,1]
  double unattached_bias = 0.5;      // [0,1]
  double worker_adhesion = 5.0;      // [0,10]
  double worker_repulsion = 5.0;     // [0,10]
  double persistence_time = 5.0;     // [0,10] minutes
  double cargo_release_o2_threshold = 10.0;  // [0,20] mmHg
};

/// Throws ConfigError when a field is outside its search bounds.
void validate(const TherapyParams& params);

/// Denormalized view of a genotype, in canonical parameter order.
TherapyParams therapy_from_genotype(const Genotype& genotype);

}  // namespace saga::sim

#endif
