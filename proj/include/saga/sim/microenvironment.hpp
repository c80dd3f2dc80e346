#ifndef SAGA_SIM_MICROENVIRONMENT_HPP
#define SAGA_SIM_MICROENVIRONMENT_HPP

#include <array>
#include <string>
#include <vector>

namespace saga::sim {

enum class BoundaryKind { dirichlet, neumann };

struct FieldSpec {
  std::string name;
  double diffusion = 0.0;       // microns^2/min
  double decay = 0.0;           // /min
  BoundaryKind boundary = BoundaryKind::neumann;
  double boundary_value = 0.0;  // dirichlet only
  double initial_value = 0.0;
};

struct Field {
  FieldSpec spec;
  std::vector<double> values;  // row-major, index iy * nx + ix
  /// False while the field has never received a positive value; lets the
  /// solver skip identically-zero substrates.
  bool nonzero = false;
};

/// Uniform 2-D voxel grid holding the four transported substrates.
/// Diffusion uses locally-one-dimensional operator splitting: one implicit
/// tridiagonal solve per row, then per column. Sources and decay are applied
/// implicitly, which keeps every field non-negative.
class Microenvironment {
 public:
  static constexpr int kOxygen = 0;
  static constexpr int kC1 = 1;
  static constexpr int kC2 = 2;
  static constexpr int kDrug = 3;
  static constexpr int kFieldCount = 4;

  Microenvironment(double half_width, double dx,
                   const std::array<FieldSpec, kFieldCount>& specs);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double dx() const { return dx_; }
  double half_width() const { return half_width_; }
  int voxel_count() const { return nx_ * ny_; }

  Field& field(int f) { return fields_[f]; }
  const Field& field(int f) const { return fields_[f]; }

  /// Nearest voxel to a position; positions outside the domain clamp to the
  /// edge voxels.
  int voxel_of(double x, double y) const;
  double value_at(int f, double x, double y) const;
  /// Central-difference gradient at the voxel containing (x, y), one-sided
  /// on the domain edge. Returns {d/dx, d/dy}.
  std::array<double, 2> gradient_at(int f, double x, double y) const;

  /// Implicit per-voxel update c = (c + dt*driven[v]) / (1 + dt*loss[v]),
  /// with driven = secretion rate times saturation and loss = secretion plus
  /// uptake rates summed over the voxel's cells.
  void apply_sources(int f, double dt, const std::vector<double>& driven,
                     const std::vector<double>& loss);
  /// c = c / (1 + dt*decay) everywhere.
  void apply_decay(int f, double dt);
  /// One operator-split implicit diffusion step.
  void diffuse(int f, double dt);
  /// Sources, decay, then diffusion for every field. Throws NumericError
  /// (naming the field and the step label) when any value is NaN or below
  /// -1e-9; values in (-1e-9, 0) are clamped to zero.
  void step(double dt, const std::array<std::vector<double>, kFieldCount>& driven,
            const std::array<std::vector<double>, kFieldCount>& loss,
            long long step_index);

  double total_mass(int f) const;  // sum of values times voxel area

 private:
  void solve_rows(Field& fld, double alpha);
  void solve_cols(Field& fld, double alpha);
  void check(Field& fld, long long step_index);

  int nx_ = 0, ny_ = 0;
  double dx_ = 0.0, half_width_ = 0.0;
  std::array<Field, kFieldCount> fields_;
  std::vector<double> diag_, rhs_, scratch_;  // tridiagonal workspaces
};

}  // namespace saga::sim

#endif
