#ifndef SAGA_SIM_CELL_HPP
#define SAGA_SIM_CELL_HPP

namespace saga::sim {

enum class CellKind { tumour, worker, cargo };

struct Cell {
  CellKind kind = CellKind::tumour;
  double x = 0.0, y = 0.0;      // microns
  double radius = 8.0;          // microns
  double dir_x = 0.0, dir_y = 0.0;  // motility direction, unit or zero
  double time_to_repolarize = 0.0;  // minutes
  int attached_to = -1;          // partner index, worker <-> cargo only
  double damage = 0.0;
  bool releasing_drug = false;   // cargo only
  bool alive = true;
  // Pairwise interaction strengths, fixed per kind at creation (workers take
  // theirs from the therapy parameters).
  double relative_adhesion = 0.0;
  double relative_repulsion = 0.0;
  double hypoxic_time = 0.0;     // consecutive minutes below the threshold
  bool motility_active = false;  // workers: gated by the c1 shutdown rule
};

}  // namespace saga::sim

#endif
