#include "saga/sim/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "saga/errors.hpp"

namespace saga::sim {
namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool integer_multiple(double big, double small) {
  if (!(small > 0.0) || !(big >= 0.0)) return false;
  const double ratio = big / small;
  return std::abs(ratio - std::lround(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

Microenvironment make_environment(const SimConfig& cfg) {
  const std::array<FieldSpec, Microenvironment::kFieldCount> specs = {
      FieldSpec{"oxygen", cfg.oxygen_diffusion, cfg.oxygen_decay,
                BoundaryKind::dirichlet, cfg.oxygen_far_field,
                cfg.oxygen_far_field},
      FieldSpec{"c1", cfg.signal_diffusion, cfg.signal_decay,
                BoundaryKind::neumann, 0.0, 0.0},
      FieldSpec{"c2", cfg.signal_diffusion, cfg.signal_decay,
                BoundaryKind::neumann, 0.0, 0.0},
      FieldSpec{"drug", cfg.signal_diffusion, cfg.signal_decay,
                BoundaryKind::neumann, 0.0, 0.0}};
  return Microenvironment(cfg.domain_half_width, cfg.dx, specs);
}

void clamp_to_domain(const SimConfig& cfg, double& x, double& y) {
  const double limit = cfg.domain_half_width - cfg.cell_radius;
  x = std::clamp(x, -limit, limit);
  y = std::clamp(y, -limit, limit);
}

Cell make_tumour_cell(const SimConfig& cfg, double x, double y) {
  Cell c;
  c.kind = CellKind::tumour;
  c.x = x;
  c.y = y;
  c.radius = cfg.cell_radius;
  c.relative_adhesion = cfg.tumour_relative_adhesion;
  c.relative_repulsion = cfg.tumour_relative_repulsion;
  return c;
}

struct CountTriple {
  int tumour = 0, workers = 0, cargo = 0;
};

CountTriple count_alive(const SimState& state) {
  CountTriple n;
  for (const Cell& c : state.cells) {
    if (!c.alive) continue;
    switch (c.kind) {
      case CellKind::tumour: ++n.tumour; break;
      case CellKind::worker: ++n.workers; break;
      case CellKind::cargo: ++n.cargo; break;
    }
  }
  return n;
}

}  // namespace

void validate(const SimConfig& cfg) {
  require(cfg.max_attach_distance > 0.0 &&
              cfg.min_attach_distance < cfg.max_attach_distance,
          "min_attach_distance must be below max_attach_distance");
  const double rates[] = {cfg.worker_apoptosis_rate, cfg.worker_o2_uptake,
                          cfg.cargo_o2_uptake, cfg.cargo_apoptosis_rate,
                          cfg.damage_rate, cfg.repair_rate,
                          cfg.drug_death_rate, cfg.elastic_coefficient,
                          cfg.tumour_o2_uptake, cfg.tumour_c1_secretion,
                          cfg.cargo_c2_secretion, cfg.drug_secretion,
                          cfg.oxygen_decay, cfg.signal_decay,
                          cfg.division_base_rate};
  for (double r : rates) require(r >= 0.0, "rates must be non-negative");
  require(cfg.cargo_relative_adhesion >= 0.0 &&
              cfg.cargo_relative_repulsion >= 0.0 &&
              cfg.tumour_relative_adhesion >= 0.0 &&
              cfg.tumour_relative_repulsion >= 0.0,
          "interaction strengths must be non-negative");
  require(cfg.max_relative_adhesion_distance >= 1.0,
          "max_relative_adhesion_distance must be at least 1");
  require(cfg.domain_half_width > 0.0 && cfg.dx > 0.0,
          "domain_half_width and dx must be positive");
  require(integer_multiple(2.0 * cfg.domain_half_width, cfg.dx) &&
              2.0 * cfg.domain_half_width >= 3.0 * cfg.dx,
          "domain width must be an integer multiple of dx, at least 3 "
          "voxels across");
  require(cfg.cell_radius > 0.0 && cfg.hex_spacing_factor > 0.0,
          "cell_radius and hex_spacing_factor must be positive");
  require(cfg.tumour_radius >= 0.0, "tumour_radius must be non-negative");
  require(cfg.tumour_radius <= cfg.domain_half_width,
          "tumour_radius exceeds the domain");
  require(cfg.injected_cells >= 0, "injected_cells must be non-negative");
  require(cfg.worker_fraction >= 0.0 && cfg.worker_fraction <= 1.0,
          "worker_fraction must be in [0,1]");
  require(cfg.injection_inner_gap >= 0.0 &&
              cfg.injection_outer_gap >= cfg.injection_inner_gap,
          "injection annulus gaps must satisfy 0 <= inner <= outer");
  require(cfg.dt_diffusion > 0.0 && cfg.dt_mechanics > 0.0 &&
              cfg.dt_biology > 0.0,
          "timesteps must be positive");
  require(cfg.dt_diffusion <= cfg.dt_mechanics &&
              cfg.dt_mechanics <= cfg.dt_biology,
          "timesteps must satisfy diffusion <= mechanics <= biology");
  require(integer_multiple(cfg.dt_mechanics, cfg.dt_diffusion),
          "dt_mechanics must be an integer multiple of dt_diffusion");
  require(integer_multiple(cfg.dt_biology, cfg.dt_mechanics),
          "dt_biology must be an integer multiple of dt_mechanics");
  require(cfg.growth_duration >= 0.0 && cfg.treatment_duration >= 0.0,
          "phase durations must be non-negative");
  require(integer_multiple(cfg.growth_duration, cfg.dt_biology),
          "growth_duration must be an integer multiple of dt_biology");
  require(integer_multiple(cfg.treatment_duration, cfg.dt_biology),
          "treatment_duration must be an integer multiple of dt_biology");
  require(cfg.oxygen_far_field >= 0.0, "oxygen_far_field must be >= 0");
  require(cfg.oxygen_diffusion >= 0.0 && cfg.signal_diffusion >= 0.0,
          "diffusion coefficients must be non-negative");
  require(cfg.hypoxia_death_threshold >= 0.0 &&
              cfg.hypoxia_survival_window >= 0.0,
          "hypoxia constants must be non-negative");
  require(cfg.division_o2_threshold < cfg.oxygen_far_field,
          "division_o2_threshold must be below oxygen_far_field");
  require(cfg.snapshot_interval > 0.0, "snapshot_interval must be positive");
}

void validate(const TherapyParams& p) {
  const auto in = [](double v, double lo, double hi) {
    return v >= lo && v <= hi;
  };
  require(in(p.attached_bias, 0.0, 1.0), "attached_bias outside [0,1]");
  require(in(p.unattached_bias, 0.0, 1.0), "unattached_bias outside [0,1]");
  require(in(p.worker_adhesion, 0.0, 10.0), "worker_adhesion outside [0,10]");
  require(in(p.worker_repulsion, 0.0, 10.0),
          "worker_repulsion outside [0,10]");
  require(in(p.persistence_time, 0.0, 10.0),
          "persistence_time outside [0,10]");
  require(in(p.cargo_release_o2_threshold, 0.0, 20.0),
          "cargo_release_o2_threshold outside [0,20]");
}

TherapyParams therapy_from_genotype(const Genotype& genotype) {
  const std::vector<double> p = denormalize(genotype, canonical_space());
  TherapyParams t;
  t.attached_bias = p[0];
  t.unattached_bias = p[1];
  t.worker_adhesion = p[2];
  t.worker_repulsion = p[3];
  t.persistence_time = p[4];
  t.cargo_release_o2_threshold = p[5];
  return t;
}

SimState init_state(const SimConfig& cfg, Rng&) {
  validate(cfg);
  SimState state{cfg, TherapyParams{}, make_environment(cfg),
                 {}, 0.0, 0, {}, {}, {}, {}, {}};

  // Hexagonal packing: rows spacing*sqrt(3)/2 apart, odd rows offset by half
  // a pitch; a centre is kept when it lies inside the disc.
  const double pitch = 2.0 * cfg.cell_radius * cfg.hex_spacing_factor;
  const double row_height = pitch * std::sqrt(3.0) / 2.0;
  const double R = cfg.tumour_radius;
  const int jmax = static_cast<int>(std::floor(R / row_height));
  for (int j = -jmax; j <= jmax; ++j) {
    const double y = j * row_height;
    const double offset = (j % 2 != 0) ? pitch / 2.0 : 0.0;
    const int imax = static_cast<int>(std::floor((R + pitch) / pitch)) + 1;
    for (int i = -imax; i <= imax; ++i) {
      const double x = offset + i * pitch;
      if (x * x + y * y <= R * R)
        state.cells.push_back(make_tumour_cell(cfg, x, y));
    }
  }
  return state;
}

void inject_therapy(SimState& state, int n, double worker_fraction, Rng& rng) {
  if (n < 0) throw std::invalid_argument("injected count must be >= 0");
  if (worker_fraction < 0.0 || worker_fraction > 1.0)
    throw std::invalid_argument("worker_fraction must be in [0,1]");
  const SimConfig& cfg = state.cfg;
  const int workers = static_cast<int>(std::lround(n * worker_fraction));
  const double r_in = cfg.tumour_radius + cfg.injection_inner_gap;
  const double r_out = cfg.tumour_radius + cfg.injection_outer_gap;

  for (int i = 0; i < n; ++i) {
    const double angle = rng.uniform(0.0, kTwoPi);
    // Area-uniform radius within the annulus.
    const double r =
        std::sqrt(rng.uniform(r_in * r_in, r_out * r_out));
    double x = r * std::cos(angle);
    double y = r * std::sin(angle);
    clamp_to_domain(cfg, x, y);

    Cell c;
    c.x = x;
    c.y = y;
    c.radius = cfg.cell_radius;
    if (i < workers) {
      c.kind = CellKind::worker;
      c.relative_adhesion = state.therapy.worker_adhesion;
      c.relative_repulsion = state.therapy.worker_repulsion;
      c.motility_active = true;
    } else {
      c.kind = CellKind::cargo;
      c.relative_adhesion = cfg.cargo_relative_adhesion;
      c.relative_repulsion = cfg.cargo_relative_repulsion;
    }
    state.cells.push_back(c);
  }
}

void step_microenvironment(SimState& state, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const SimConfig& cfg = state.cfg;
  Microenvironment& env = state.env;
  const std::size_t voxels = static_cast<std::size_t>(env.voxel_count());
  for (int f = 0; f < Microenvironment::kFieldCount; ++f) {
    state.src_driven[f].assign(voxels, 0.0);
    state.src_loss[f].assign(voxels, 0.0);
  }

  for (const Cell& c : state.cells) {
    if (!c.alive) continue;
    const std::size_t v = static_cast<std::size_t>(env.voxel_of(c.x, c.y));
    switch (c.kind) {
      case CellKind::tumour:
        state.src_loss[Microenvironment::kOxygen][v] += cfg.tumour_o2_uptake;
        state.src_driven[Microenvironment::kC1][v] += cfg.tumour_c1_secretion;
        state.src_loss[Microenvironment::kC1][v] += cfg.tumour_c1_secretion;
        break;
      case CellKind::worker:
        state.src_loss[Microenvironment::kOxygen][v] += cfg.worker_o2_uptake;
        break;
      case CellKind::cargo:
        state.src_loss[Microenvironment::kOxygen][v] += cfg.cargo_o2_uptake;
        if (c.releasing_drug) {
          state.src_driven[Microenvironment::kDrug][v] += cfg.drug_secretion;
          state.src_loss[Microenvironment::kDrug][v] += cfg.drug_secretion;
        } else if (c.attached_to < 0) {
          state.src_driven[Microenvironment::kC2][v] += cfg.cargo_c2_secretion;
          state.src_loss[Microenvironment::kC2][v] += cfg.cargo_c2_secretion;
        }
        break;
    }
  }
  env.step(dt, state.src_driven, state.src_loss, ++state.diffusion_steps);
}

void step_mechanics(SimState& state, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const SimConfig& cfg = state.cfg;
  const std::size_t n = state.cells.size();
  state.velocities.assign(2 * n, 0.0);

  // Linked-list spatial bins sized to the widest pair interaction.
  const double reach =
      cfg.max_relative_adhesion_distance * 2.0 * cfg.cell_radius;
  const double bin_w = std::max(reach, 1e-6);
  const int bins_per_side = std::max(
      1, static_cast<int>(std::ceil(2.0 * cfg.domain_half_width / bin_w)));
  state.bin_head.assign(
      static_cast<std::size_t>(bins_per_side) * bins_per_side, -1);
  state.bin_next.assign(n, -1);
  const auto bin_of = [&](double x, double y) {
    const auto idx = [&](double c) {
      return std::clamp(
          static_cast<int>((c + cfg.domain_half_width) / bin_w), 0,
          bins_per_side - 1);
    };
    return idx(y) * bins_per_side + idx(x);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!state.cells[i].alive) continue;
    const int b = bin_of(state.cells[i].x, state.cells[i].y);
    state.bin_next[i] = state.bin_head[b];
    state.bin_head[b] = static_cast<int>(i);
  }

  const double A = cfg.max_relative_adhesion_distance;
  for (std::size_t i = 0; i < n; ++i) {
    const Cell& ci = state.cells[i];
    if (!ci.alive) continue;
    const int bx = std::clamp(
        static_cast<int>((ci.x + cfg.domain_half_width) / bin_w), 0,
        bins_per_side - 1);
    const int by = std::clamp(
        static_cast<int>((ci.y + cfg.domain_half_width) / bin_w), 0,
        bins_per_side - 1);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dxn = -1; dxn <= 1; ++dxn) {
        const int nbx = bx + dxn, nby = by + dy;
        if (nbx < 0 || nbx >= bins_per_side || nby < 0 ||
            nby >= bins_per_side)
          continue;
        for (int j = state.bin_head[nby * bins_per_side + nbx]; j >= 0;
             j = state.bin_next[j]) {
          if (static_cast<std::size_t>(j) <= i) continue;  // each pair once
          const Cell& cj = state.cells[j];
          const double ddx = ci.x - cj.x;
          const double ddy = ci.y - cj.y;
          const double d = std::sqrt(ddx * ddx + ddy * ddy);
          if (d <= 1e-12) continue;  // coincident: no defined direction
          const double r_sum = ci.radius + cj.radius;
          const double ux = ddx / d, uy = ddy / d;
          double mag = 0.0;  // positive pushes i away from j
          if (d < r_sum) {
            const double overlap = 1.0 - d / r_sum;
            mag += std::sqrt(ci.relative_repulsion * cj.relative_repulsion) *
                   overlap * overlap;
          }
          const double adh_range = A * r_sum;
          if (d < adh_range) {
            const double closeness = 1.0 - d / adh_range;
            mag -= std::sqrt(ci.relative_adhesion * cj.relative_adhesion) *
                   closeness * closeness;
          }
          if (mag != 0.0) {
            state.velocities[2 * i] += mag * ux;
            state.velocities[2 * i + 1] += mag * uy;
            state.velocities[2 * j] -= mag * ux;
            state.velocities[2 * j + 1] -= mag * uy;
          }
        }
      }
    }
  }

  // Attachment springs pull both partners toward contact distance; the
  // per-step displacement each side contributes is capped.
  for (std::size_t i = 0; i < n; ++i) {
    const Cell& w = state.cells[i];
    if (w.kind != CellKind::worker || w.attached_to < 0 || !w.alive) continue;
    const Cell& c = state.cells[w.attached_to];
    const double ddx = c.x - w.x, ddy = c.y - w.y;
    const double d = std::sqrt(ddx * ddx + ddy * ddy);
    if (d <= 1e-12) continue;
    const double rest = w.radius + c.radius;
    double disp = cfg.elastic_coefficient * (d - rest) * dt;
    disp = std::clamp(disp, -cfg.max_elastic_displacement,
                      cfg.max_elastic_displacement);
    const double ux = ddx / d, uy = ddy / d;
    state.velocities[2 * i] += disp / dt * ux;
    state.velocities[2 * i + 1] += disp / dt * uy;
    const std::size_t j = static_cast<std::size_t>(w.attached_to);
    state.velocities[2 * j] -= disp / dt * ux;
    state.velocities[2 * j + 1] -= disp / dt * uy;
  }

  for (std::size_t i = 0; i < n; ++i) {
    Cell& c = state.cells[i];
    if (!c.alive) continue;
    double vx = state.velocities[2 * i];
    double vy = state.velocities[2 * i + 1];
    if (c.kind == CellKind::worker && c.motility_active) {
      vx += cfg.worker_migration_speed * c.dir_x;
      vy += cfg.worker_migration_speed * c.dir_y;
    }
    c.x += dt * vx;
    c.y += dt * vy;
    clamp_to_domain(cfg, c.x, c.y);
  }
}

void step_motility_and_adhesion(SimState& state, const TherapyParams& params,
                                const SimConfig& cfg, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  Microenvironment& env = state.env;

  for (std::size_t i = 0; i < state.cells.size(); ++i) {
    Cell& w = state.cells[i];
    if (w.kind != CellKind::worker || !w.alive) continue;
    const bool attached = w.attached_to >= 0;
    const double c1_here =
        env.value_at(Microenvironment::kC1, w.x, w.y);
    w.motility_active =
        attached || c1_here >= cfg.motility_shutdown_threshold;

    w.time_to_repolarize -= dt;
    if (w.time_to_repolarize <= 0.0) {
      w.time_to_repolarize = rng.exponential(params.persistence_time);
      const double angle = rng.uniform(0.0, kTwoPi);
      const double rx = std::cos(angle), ry = std::sin(angle);
      const int field = attached ? Microenvironment::kC1
                                 : Microenvironment::kC2;
      const std::array<double, 2> g = env.gradient_at(field, w.x, w.y);
      const double gn = std::sqrt(g[0] * g[0] + g[1] * g[1]);
      const double bias =
          attached ? params.attached_bias : params.unattached_bias;
      double bx = (1.0 - bias) * rx;
      double by = (1.0 - bias) * ry;
      if (gn > 0.0) {
        bx += bias * g[0] / gn;
        by += bias * g[1] / gn;
      }
      const double norm = std::sqrt(bx * bx + by * by);
      if (norm > 1e-12) {
        w.dir_x = bx / norm;
        w.dir_y = by / norm;
      }
      // Fully biased with a flat field: keep the previous heading.
    }
  }

  // Attachment, workers in index order, each taking the nearest receptive
  // unattached cargo in range; ties break toward the lower cargo index.
  for (std::size_t i = 0; i < state.cells.size(); ++i) {
    Cell& w = state.cells[i];
    if (w.kind != CellKind::worker || !w.alive || w.attached_to >= 0)
      continue;
    int best = -1;
    double best_d = cfg.max_attach_distance;
    for (std::size_t j = 0; j < state.cells.size(); ++j) {
      const Cell& c = state.cells[j];
      if (c.kind != CellKind::cargo || !c.alive || c.attached_to >= 0 ||
          c.releasing_drug)
        continue;
      const double d = std::hypot(w.x - c.x, w.y - c.y);
      if (d > best_d || (d == best_d && best >= 0)) continue;
      if (env.value_at(Microenvironment::kC2, c.x, c.y) <
          cfg.attachment_receptor_threshold)
        continue;
      best = static_cast<int>(j);
      best_d = d;
    }
    if (best >= 0) {
      w.attached_to = best;
      state.cells[best].attached_to = static_cast<int>(i);
    }
  }

  // Cargo release at hypoxic destinations.
  for (std::size_t j = 0; j < state.cells.size(); ++j) {
    Cell& c = state.cells[j];
    if (c.kind != CellKind::cargo || !c.alive || c.attached_to < 0) continue;
    if (env.value_at(Microenvironment::kOxygen, c.x, c.y) <
        params.cargo_release_o2_threshold) {
      state.cells[c.attached_to].attached_to = -1;
      c.attached_to = -1;
      c.releasing_drug = true;
    }
  }
}

void step_biology(SimState& state, const SimConfig& cfg, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  Microenvironment& env = state.env;
  std::vector<Cell> daughters;
  const std::size_t n0 = state.cells.size();

  for (std::size_t i = 0; i < n0; ++i) {
    Cell& c = state.cells[i];
    if (!c.alive) continue;
    switch (c.kind) {
      case CellKind::tumour: {
        const double drug =
            env.value_at(Microenvironment::kDrug, c.x, c.y);
        c.damage = (c.damage + dt * cfg.damage_rate * drug) /
                   (1.0 + dt * cfg.repair_rate);
        const double p_death =
            1.0 - std::exp(-dt * cfg.drug_death_rate * c.damage);
        if (rng.uniform() < p_death) {
          c.alive = false;
          break;
        }
        const double o2 =
            env.value_at(Microenvironment::kOxygen, c.x, c.y);
        if (o2 < cfg.hypoxia_death_threshold) {
          c.hypoxic_time += dt;
          if (c.hypoxic_time > cfg.hypoxia_survival_window) {
            c.alive = false;
            break;
          }
        } else {
          c.hypoxic_time = 0.0;
        }
        const double o2_excess =
            std::max(0.0, (o2 - cfg.division_o2_threshold) /
                              (cfg.oxygen_far_field -
                               cfg.division_o2_threshold));
        const double p_divide =
            1.0 - std::exp(-dt * cfg.division_base_rate * o2_excess);
        if (rng.uniform() < p_divide) {
          const double angle = rng.uniform(0.0, kTwoPi);
          Cell d = make_tumour_cell(cfg, c.x + c.radius * std::cos(angle),
                                    c.y + c.radius * std::sin(angle));
          clamp_to_domain(cfg, d.x, d.y);
          d.damage = c.damage;
          daughters.push_back(d);
        }
        break;
      }
      case CellKind::cargo: {
        const double p_death =
            1.0 - std::exp(-dt * cfg.cargo_apoptosis_rate);
        if (rng.uniform() < p_death) {
          c.alive = false;
          if (c.attached_to >= 0) {
            state.cells[c.attached_to].attached_to = -1;
            c.attached_to = -1;
          }
        }
        break;
      }
      case CellKind::worker: {
        if (cfg.worker_apoptosis_rate > 0.0) {
          const double p_death =
              1.0 - std::exp(-dt * cfg.worker_apoptosis_rate);
          if (rng.uniform() < p_death) {
            c.alive = false;
            if (c.attached_to >= 0) {
              state.cells[c.attached_to].attached_to = -1;
              c.attached_to = -1;
            }
          }
        }
        break;
      }
    }
  }

  for (const Cell& d : daughters) state.cells.push_back(d);

  // Compact the dead out and remap attachment indices.
  std::vector<int> remap(state.cells.size(), -1);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < state.cells.size(); ++i) {
    if (!state.cells[i].alive) continue;
    remap[i] = static_cast<int>(kept);
    if (kept != i) state.cells[kept] = state.cells[i];
    ++kept;
  }
  state.cells.resize(kept);
  for (Cell& c : state.cells) {
    if (c.attached_to >= 0) c.attached_to = remap[c.attached_to];
  }
}

SimOutcome run_simulation(const SimConfig& cfg, const TherapyParams& params,
                          std::uint64_t seed, const SimObserver& observer) {
  validate(cfg);
  validate(params);
  const auto t0 = std::chrono::steady_clock::now();

  Rng rng(seed);
  SimState state = init_state(cfg, rng);
  state.therapy = params;

  SimOutcome outcome;
  outcome.seed = seed;
  const auto record = [&] {
    const CountTriple n = count_alive(state);
    outcome.counts.push_back({state.time, n.tumour, n.workers, n.cargo});
  };
  double last_snapshot = -1e300;
  const auto observe = [&](bool force) {
    if (!observer) return;
    if (force || state.time - last_snapshot >=
                     cfg.snapshot_interval - 1e-9) {
      observer(state);
      last_snapshot = state.time;
    }
  };

  record();
  observe(true);

  const int diff_per_mech =
      static_cast<int>(std::lround(cfg.dt_mechanics / cfg.dt_diffusion));
  const int mech_per_bio =
      static_cast<int>(std::lround(cfg.dt_biology / cfg.dt_mechanics));
  const auto advance_phase = [&](double duration, bool treatment) {
    const int bio_steps =
        static_cast<int>(std::lround(duration / cfg.dt_biology));
    for (int b = 0; b < bio_steps; ++b) {
      for (int m = 0; m < mech_per_bio; ++m) {
        for (int d = 0; d < diff_per_mech; ++d)
          step_microenvironment(state, cfg.dt_diffusion);
        if (treatment)
          step_motility_and_adhesion(state, params, cfg, cfg.dt_mechanics,
                                     rng);
        step_mechanics(state, cfg.dt_mechanics);
      }
      step_biology(state, cfg, cfg.dt_biology, rng);
      state.time += cfg.dt_biology;
      record();
      observe(false);
    }
  };

  advance_phase(cfg.growth_duration, false);
  inject_therapy(state, cfg.injected_cells, cfg.worker_fraction, rng);
  record();  // post-injection sample at the same timestamp
  advance_phase(cfg.treatment_duration, true);
  observe(true);

  outcome.tumour_cell_count = count_alive(state).tumour;
  outcome.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return outcome;
}

std::function<double(const Genotype&, std::uint64_t)> objective_adapter(
    const SimConfig& cfg) {
  return [cfg](const Genotype& genotype, std::uint64_t seed) -> double {
    const TherapyParams params = therapy_from_genotype(genotype);
    const SimOutcome outcome = run_simulation(cfg, params, seed);
    if (cfg.count_all_cells) {
      const CountSample& last = outcome.counts.back();
      return static_cast<double>(last.tumour + last.workers + last.cargo);
    }
    return static_cast<double>(outcome.tumour_cell_count);
  };
}

}  // namespace saga::sim
