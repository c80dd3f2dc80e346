#include "saga/sim/microenvironment.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "saga/errors.hpp"

namespace saga::sim {

Microenvironment::Microenvironment(
    double half_width, double dx,
    const std::array<FieldSpec, kFieldCount>& specs) {
  if (!(half_width > 0.0) || !(dx > 0.0))
    throw ConfigError("domain half-width and dx must be positive");
  const double cells = 2.0 * half_width / dx;
  nx_ = static_cast<int>(std::lround(cells));
  if (nx_ < 3 || std::abs(cells - nx_) > 1e-9 * cells)
    throw ConfigError("domain width must be an integer multiple of dx, "
                      "at least 3 voxels across");
  ny_ = nx_;
  dx_ = dx;
  half_width_ = half_width;
  for (int f = 0; f < kFieldCount; ++f) {
    fields_[f].spec = specs[f];
    fields_[f].values.assign(static_cast<std::size_t>(nx_) * ny_,
                             specs[f].initial_value);
    fields_[f].nonzero =
        specs[f].initial_value > 0.0 ||
        (specs[f].boundary == BoundaryKind::dirichlet &&
         specs[f].boundary_value > 0.0);
  }
  diag_.resize(nx_);
  rhs_.resize(nx_);
  scratch_.resize(nx_);
}

int Microenvironment::voxel_of(double x, double y) const {
  const auto clamp_index = [this](double c) {
    const int i = static_cast<int>(std::floor((c + half_width_) / dx_));
    return std::clamp(i, 0, nx_ - 1);
  };
  return clamp_index(y) * nx_ + clamp_index(x);
}

double Microenvironment::value_at(int f, double x, double y) const {
  return fields_[f].values[voxel_of(x, y)];
}

std::array<double, 2> Microenvironment::gradient_at(int f, double x,
                                                    double y) const {
  const int v = voxel_of(x, y);
  const int ix = v % nx_;
  const int iy = v / nx_;
  const std::vector<double>& c = fields_[f].values;
  const auto diff = [this, &c](int lo, int hi, int span) {
    return (c[hi] - c[lo]) / (span * dx_);
  };
  const double gx = ix == 0         ? diff(v, v + 1, 1)
                    : ix == nx_ - 1 ? diff(v - 1, v, 1)
                                    : diff(v - 1, v + 1, 2);
  const double gy = iy == 0         ? diff(v, v + nx_, 1)
                    : iy == ny_ - 1 ? diff(v - nx_, v, 1)
                                    : diff(v - nx_, v + nx_, 2);
  return {gx, gy};
}

void Microenvironment::apply_sources(int f, double dt,
                                     const std::vector<double>& driven,
                                     const std::vector<double>& loss) {
  Field& fld = fields_[f];
  assert(driven.size() == fld.values.size());
  assert(loss.size() == fld.values.size());
  bool touched = false;
  for (std::size_t v = 0; v < fld.values.size(); ++v) {
    if (driven[v] == 0.0 && loss[v] == 0.0) continue;
    fld.values[v] = (fld.values[v] + dt * driven[v]) / (1.0 + dt * loss[v]);
    touched = touched || driven[v] > 0.0;
  }
  fld.nonzero = fld.nonzero || touched;
}

void Microenvironment::apply_decay(int f, double dt) {
  Field& fld = fields_[f];
  if (fld.spec.decay == 0.0 || !fld.nonzero) return;
  const double factor = 1.0 / (1.0 + dt * fld.spec.decay);
  for (double& v : fld.values) v *= factor;
}

void Microenvironment::solve_rows(Field& fld, double alpha) {
  const bool dirichlet = fld.spec.boundary == BoundaryKind::dirichlet;
  const double edge_diag = dirichlet ? 1.0 + 2.0 * alpha : 1.0 + alpha;
  const double boundary_feed =
      dirichlet ? alpha * fld.spec.boundary_value : 0.0;

  // Forward-elimination denominators are identical for every row; sweep them
  // once. diag_ holds the denominators, scratch_ the normalized off-diagonal.
  diag_[0] = edge_diag;
  scratch_[0] = -alpha / diag_[0];
  for (int i = 1; i < nx_; ++i) {
    const double b = i == nx_ - 1 ? edge_diag : 1.0 + 2.0 * alpha;
    diag_[i] = b + alpha * scratch_[i - 1];
    scratch_[i] = -alpha / diag_[i];
  }

  for (int iy = 0; iy < ny_; ++iy) {
    double* row = fld.values.data() + static_cast<std::size_t>(iy) * nx_;
    rhs_[0] = (row[0] + boundary_feed) / diag_[0];
    for (int i = 1; i < nx_; ++i) {
      const double d = row[i] + (i == nx_ - 1 ? boundary_feed : 0.0);
      rhs_[i] = (d + alpha * rhs_[i - 1]) / diag_[i];
    }
    row[nx_ - 1] = rhs_[nx_ - 1];
    for (int i = nx_ - 2; i >= 0; --i)
      row[i] = rhs_[i] - scratch_[i] * row[i + 1];
  }
}

void Microenvironment::solve_cols(Field& fld, double alpha) {
  const bool dirichlet = fld.spec.boundary == BoundaryKind::dirichlet;
  const double edge_diag = dirichlet ? 1.0 + 2.0 * alpha : 1.0 + alpha;
  const double boundary_feed =
      dirichlet ? alpha * fld.spec.boundary_value : 0.0;

  diag_[0] = edge_diag;
  scratch_[0] = -alpha / diag_[0];
  for (int i = 1; i < ny_; ++i) {
    const double b = i == ny_ - 1 ? edge_diag : 1.0 + 2.0 * alpha;
    diag_[i] = b + alpha * scratch_[i - 1];
    scratch_[i] = -alpha / diag_[i];
  }

  for (int ix = 0; ix < nx_; ++ix) {
    double* col = fld.values.data() + ix;
    rhs_[0] = (col[0] + boundary_feed) / diag_[0];
    for (int i = 1; i < ny_; ++i) {
      const double d = col[static_cast<std::size_t>(i) * nx_] +
                       (i == ny_ - 1 ? boundary_feed : 0.0);
      rhs_[i] = (d + alpha * rhs_[i - 1]) / diag_[i];
    }
    col[static_cast<std::size_t>(ny_ - 1) * nx_] = rhs_[ny_ - 1];
    for (int i = ny_ - 2; i >= 0; --i)
      col[static_cast<std::size_t>(i) * nx_] =
          rhs_[i] - scratch_[i] * col[static_cast<std::size_t>(i + 1) * nx_];
  }
}

void Microenvironment::diffuse(int f, double dt) {
  Field& fld = fields_[f];
  if (fld.spec.diffusion == 0.0) return;
  // An identically-zero field with nothing feeding in stays zero.
  if (!fld.nonzero) return;
  const double alpha = fld.spec.diffusion * dt / (dx_ * dx_);
  solve_rows(fld, alpha);
  solve_cols(fld, alpha);
}

void Microenvironment::check(Field& fld, long long step_index) {
  for (double& v : fld.values) {
    if (!(v >= -1e-9))
      throw NumericError("field " + fld.spec.name +
                         " unstable (NaN or negative) at microenvironment "
                         "step " +
                         std::to_string(step_index));
    if (v < 0.0) v = 0.0;  // clamp solver roundoff
  }
}

void Microenvironment::step(
    double dt, const std::array<std::vector<double>, kFieldCount>& driven,
    const std::array<std::vector<double>, kFieldCount>& loss,
    long long step_index) {
  if (!(dt > 0.0)) throw ConfigError("microenvironment dt must be positive");
  for (int f = 0; f < kFieldCount; ++f) {
    apply_sources(f, dt, driven[f], loss[f]);
    apply_decay(f, dt);
    // Pre-diffusion check: corrupted input must fail loudly, not get smeared
    // into plausible positives by the solve below.
    check(fields_[f], step_index);
    diffuse(f, dt);
    check(fields_[f], step_index);
  }
}

double Microenvironment::total_mass(int f) const {
  double sum = 0.0;
  for (double v : fields_[f].values) sum += v;
  return sum * dx_ * dx_;
}

}  // namespace saga::sim
