#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "saga/errors.hpp"
#include "saga/sim/simulation.hpp"

using namespace saga;
using namespace saga::sim;

namespace {

SimState fresh_state(const SimConfig& cfg) {
  Rng rng(1);
  return init_state(cfg, rng);
}

/// State with no cells, for hand-built scenarios. Keeps cfg intact so
/// derived geometry (e.g. the injection annulus) matches the caller's view.
SimState empty_state(const SimConfig& cfg) {
  SimState s = fresh_state(cfg);
  s.cells.clear();
  return s;
}

Cell tumour_at(const SimConfig& cfg, double x, double y) {
  Cell c;
  c.kind = CellKind::tumour;
  c.x = x;
  c.y = y;
  c.radius = cfg.cell_radius;
  c.relative_adhesion = cfg.tumour_relative_adhesion;
  c.relative_repulsion = cfg.tumour_relative_repulsion;
  return c;
}

Cell worker_at(double x, double y, double adhesion, double repulsion) {
  Cell c;
  c.kind = CellKind::worker;
  c.x = x;
  c.y = y;
  c.relative_adhesion = adhesion;
  c.relative_repulsion = repulsion;
  return c;
}

Cell cargo_at(const SimConfig& cfg, double x, double y) {
  Cell c;
  c.kind = CellKind::cargo;
  c.x = x;
  c.y = y;
  c.relative_adhesion = cfg.cargo_relative_adhesion;
  c.relative_repulsion = cfg.cargo_relative_repulsion;
  return c;
}

void fill_field(SimState& s, int f, double value) {
  s.env.field(f).values.assign(s.env.voxel_count(), value);
  s.env.field(f).nonzero = value > 0.0;
}

int alive_of(const SimState& s, CellKind kind) {
  int n = 0;
  for (const Cell& c : s.cells)
    if (c.alive && c.kind == kind) ++n;
  return n;
}

}  // namespace

TEST_CASE("therapy parameters decode from the genotype in canonical order") {
  const TherapyParams mid = therapy_from_genotype(Genotype(6, 0.0));
  CHECK(mid.attached_bias == doctest::Approx(0.5));
  CHECK(mid.unattached_bias == doctest::Approx(0.5));
  CHECK(mid.worker_adhesion == doctest::Approx(5.0));
  CHECK(mid.worker_repulsion == doctest::Approx(5.0));
  CHECK(mid.persistence_time == doctest::Approx(5.0));
  CHECK(mid.cargo_release_o2_threshold == doctest::Approx(10.0));

  const TherapyParams hi = therapy_from_genotype(Genotype(6, 1.0));
  CHECK(hi.attached_bias == doctest::Approx(1.0));
  CHECK(hi.cargo_release_o2_threshold == doctest::Approx(20.0));
  const TherapyParams lo = therapy_from_genotype(Genotype(6, -1.0));
  CHECK(lo.worker_adhesion == doctest::Approx(0.0));
  CHECK(lo.cargo_release_o2_threshold == doctest::Approx(0.0));

  CHECK_THROWS_AS(therapy_from_genotype(Genotype(5, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("configuration validation rejects broken setups") {
  CHECK_NOTHROW(validate(SimConfig{}));
  const auto rejects = [](auto&& breakit) {
    SimConfig cfg;
    breakit(cfg);
    CHECK_THROWS_AS(validate(cfg), ConfigError);
  };
  rejects([](SimConfig& c) { c.min_attach_distance = c.max_attach_distance; });
  rejects([](SimConfig& c) { c.damage_rate = -1.0; });
  rejects([](SimConfig& c) { c.max_relative_adhesion_distance = 0.9; });
  rejects([](SimConfig& c) { c.dx = -5.0; });
  rejects([](SimConfig& c) { c.tumour_radius = c.domain_half_width + 1.0; });
  rejects([](SimConfig& c) { c.worker_fraction = 1.5; });
  rejects([](SimConfig& c) { c.injection_outer_gap = 5.0; });  // below inner
  rejects([](SimConfig& c) { c.dt_mechanics = 0.025; });  // not a multiple
  rejects([](SimConfig& c) { c.dt_biology = 0.05; });     // below mechanics
  rejects([](SimConfig& c) { c.growth_duration = 7.0; });
  rejects([](SimConfig& c) { c.division_o2_threshold = c.oxygen_far_field; });
  rejects([](SimConfig& c) { c.snapshot_interval = 0.0; });

  CHECK_NOTHROW(validate(TherapyParams{}));
  const auto rejects_t = [](auto&& breakit) {
    TherapyParams p;
    breakit(p);
    CHECK_THROWS_AS(validate(p), ConfigError);
  };
  rejects_t([](TherapyParams& p) { p.attached_bias = 1.1; });
  rejects_t([](TherapyParams& p) { p.unattached_bias = -0.1; });
  rejects_t([](TherapyParams& p) { p.worker_adhesion = 11.0; });
  rejects_t([](TherapyParams& p) { p.worker_repulsion = -1.0; });
  rejects_t([](TherapyParams& p) { p.persistence_time = 10.5; });
  rejects_t([](TherapyParams& p) { p.cargo_release_o2_threshold = 20.5; });
}

TEST_CASE("the initial tumour is a hex-packed disc") {
  const SimConfig cfg;
  const SimState s = fresh_state(cfg);

  // Hand count for radius 50, pitch 15.2, row height 13.1636:
  // rows j = -3..3 hold 4,5,6,7,6,5,4 centres inside the disc.
  CHECK(s.cells.size() == 37);

  const double pitch = 2.0 * cfg.cell_radius * cfg.hex_spacing_factor;
  for (const Cell& c : s.cells) {
    CHECK(c.kind == CellKind::tumour);
    CHECK(c.alive);
    CHECK(c.x * c.x + c.y * c.y <= cfg.tumour_radius * cfg.tumour_radius + 1e-9);
    CHECK(c.radius == cfg.cell_radius);
    CHECK(c.relative_adhesion == cfg.tumour_relative_adhesion);
    CHECK(c.relative_repulsion == cfg.tumour_relative_repulsion);
  }
  // Lattice packing: no two centres closer than one pitch.
  for (std::size_t i = 0; i < s.cells.size(); ++i)
    for (std::size_t j = i + 1; j < s.cells.size(); ++j) {
      const double d = std::hypot(s.cells[i].x - s.cells[j].x,
                                  s.cells[i].y - s.cells[j].y);
      CHECK(d >= pitch * (1.0 - 1e-12));
    }

  SimConfig point = cfg;
  point.tumour_radius = 0.0;
  const SimState sp = fresh_state(point);
  CHECK(sp.cells.size() == 1);
  CHECK(sp.cells[0].x == 0.0);
  CHECK(sp.cells[0].y == 0.0);

  // Initial substrate state: oxygen at the far-field value, the rest zero.
  for (double v : sp.env.field(Microenvironment::kOxygen).values)
    CHECK(v == cfg.oxygen_far_field);
  for (int f : {Microenvironment::kC1, Microenvironment::kC2,
                Microenvironment::kDrug})
    for (double v : sp.env.field(f).values) CHECK(v == 0.0);
}

TEST_CASE("injection splits workers and cargo into the annulus") {
  const SimConfig cfg;
  SimState s = empty_state(cfg);
  s.therapy.worker_adhesion = 7.0;
  s.therapy.worker_repulsion = 2.5;
  Rng rng(55);
  inject_therapy(s, 100, 0.1, rng);
  CHECK(s.cells.size() == 100);

  const double r_in = cfg.tumour_radius + cfg.injection_inner_gap;
  const double r_out = cfg.tumour_radius + cfg.injection_outer_gap;
  int workers = 0, cargo = 0;
  for (std::size_t i = 0; i < s.cells.size(); ++i) {
    const Cell& c = s.cells[i];
    const double r = std::hypot(c.x, c.y);
    CHECK(r >= r_in - 1e-9);
    CHECK(r <= r_out + 1e-9);
    if (c.kind == CellKind::worker) {
      ++workers;
      CHECK(i < 10);  // workers come first
      CHECK(c.relative_adhesion == 7.0);
      CHECK(c.relative_repulsion == 2.5);
      CHECK(c.motility_active);
    } else {
      REQUIRE(c.kind == CellKind::cargo);
      ++cargo;
      CHECK(c.relative_adhesion == cfg.cargo_relative_adhesion);
      CHECK(c.relative_repulsion == cfg.cargo_relative_repulsion);
    }
    CHECK(c.attached_to == -1);
    CHECK(!c.releasing_drug);
  }
  CHECK(workers == 10);
  CHECK(cargo == 90);

  SimState s2 = empty_state(cfg);
  inject_therapy(s2, 500, 0.1, rng);
  CHECK(alive_of(s2, CellKind::worker) == 50);
  SimState s3 = empty_state(cfg);
  inject_therapy(s3, 7, 1.0, rng);
  CHECK(alive_of(s3, CellKind::worker) == 7);
  inject_therapy(s3, 0, 0.5, rng);
  CHECK(s3.cells.size() == 7);
  CHECK_THROWS_AS(inject_therapy(s3, -1, 0.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(inject_therapy(s3, 5, 1.5, rng), std::invalid_argument);

  // Area-uniform placement: the squared radius is uniform on [r_in^2, r_out^2].
  SimState s4 = empty_state(cfg);
  inject_therapy(s4, 4000, 0.0, rng);
  double mean_r2 = 0.0, mean_x = 0.0;
  for (const Cell& c : s4.cells) {
    mean_r2 += c.x * c.x + c.y * c.y;
    mean_x += c.x;
  }
  mean_r2 /= 4000.0;
  mean_x /= 4000.0;
  CHECK(mean_r2 == doctest::Approx((r_in * r_in + r_out * r_out) / 2.0)
                       .epsilon(0.02));
  CHECK(std::fabs(mean_x) <= 3.0);
}

TEST_CASE("attachment springs relax to contact distance geometrically") {
  SimConfig cfg;
  cfg.worker_migration_speed = 0.0;
  SimState s = empty_state(cfg);
  s.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s.cells.push_back(cargo_at(cfg, 30.0, 0.0));
  s.cells[1].relative_repulsion = 0.0;
  s.cells[0].attached_to = 1;
  s.cells[1].attached_to = 0;
  s.cells[0].motility_active = false;

  const double dt = 0.1;
  const double rest = 16.0;
  // One step: each side contributes elastic * (d - rest) * dt.
  step_mechanics(s, dt);
  const double disp = cfg.elastic_coefficient * (30.0 - rest) * dt;
  CHECK(s.cells[0].x == doctest::Approx(disp).epsilon(1e-12));
  CHECK(s.cells[1].x == doctest::Approx(30.0 - disp).epsilon(1e-12));

  // n further steps: (d_n - rest) = (d_0 - rest) (1 - 2 elastic dt)^n.
  const double shrink = 1.0 - 2.0 * cfg.elastic_coefficient * dt;
  double expected = (30.0 - rest) - 2.0 * disp;
  for (int n = 0; n < 40; ++n) {
    const double d_before = s.cells[1].x - s.cells[0].x;
    CHECK(std::fabs(d_before - (rest + expected)) <= 1e-10);
    step_mechanics(s, dt);
    expected *= shrink;
  }

  // The per-step elastic displacement cap binds when the spring is stretched.
  SimConfig capped = cfg;
  capped.max_elastic_displacement = 0.05;
  SimState s2 = empty_state(capped);
  s2.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s2.cells.push_back(cargo_at(capped, 30.0, 0.0));
  s2.cells[1].relative_repulsion = 0.0;
  s2.cells[0].attached_to = 1;
  s2.cells[1].attached_to = 0;
  step_mechanics(s2, dt);
  CHECK(s2.cells[0].x == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(s2.cells[1].x == doctest::Approx(29.95).epsilon(1e-12));
}

TEST_CASE("pair forces push apart on overlap and pull together in range") {
  SimConfig cfg;
  SimState s = empty_state(cfg);
  s.cells.push_back(tumour_at(cfg, 0.0, 0.0));
  s.cells.push_back(tumour_at(cfg, 8.0, 0.0));
  const double dt = 0.1;
  step_mechanics(s, dt);
  // d = 8, r_sum = 16: overlap 0.5, repulsion 10 -> magnitude 2.5 outward;
  // adhesion range 20: closeness 0.6, adhesion 0.4 -> 0.144 inward.
  const double mag = 10.0 * 0.25 - 0.4 * 0.36;
  CHECK(s.cells[0].x == doctest::Approx(-dt * mag).epsilon(1e-12));
  CHECK(s.cells[1].x == doctest::Approx(8.0 + dt * mag).epsilon(1e-12));
  CHECK(s.cells[0].y == 0.0);

  SimState s2 = empty_state(cfg);
  s2.cells.push_back(tumour_at(cfg, 0.0, 0.0));
  s2.cells.push_back(tumour_at(cfg, 18.0, 0.0));
  step_mechanics(s2, dt);
  // d = 18 is outside contact but inside the adhesion range 20.
  const double pull = 0.4 * (1.0 - 18.0 / 20.0) * (1.0 - 18.0 / 20.0);
  CHECK(s2.cells[0].x == doctest::Approx(dt * pull).epsilon(1e-12));
  CHECK(s2.cells[1].x == doctest::Approx(18.0 - dt * pull).epsilon(1e-12));

  SimState s3 = empty_state(cfg);
  s3.cells.push_back(tumour_at(cfg, 0.0, 0.0));
  s3.cells.push_back(tumour_at(cfg, 21.0, 0.0));
  step_mechanics(s3, dt);
  CHECK(s3.cells[0].x == 0.0);  // beyond every interaction range
  CHECK(s3.cells[1].x == 21.0);

  // Cells never leave the domain.
  SimState s4 = empty_state(cfg);
  s4.cells.push_back(tumour_at(cfg, -291.0, 0.0));
  s4.cells.push_back(tumour_at(cfg, -283.0, 0.0));
  for (int i = 0; i < 50; ++i) step_mechanics(s4, dt);
  for (const Cell& c : s4.cells) {
    CHECK(c.x >= -(cfg.domain_half_width - cfg.cell_radius));
    CHECK(c.x <= cfg.domain_half_width - cfg.cell_radius);
  }
}

TEST_CASE("motile workers travel at the configured speed") {
  SimConfig cfg;
  SimState s = empty_state(cfg);
  s.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s.cells[0].motility_active = true;
  s.cells[0].dir_x = 0.6;
  s.cells[0].dir_y = -0.8;
  step_mechanics(s, 0.1);
  CHECK(s.cells[0].x == doctest::Approx(0.1 * 2.0 * 0.6).epsilon(1e-12));
  CHECK(s.cells[0].y == doctest::Approx(-0.1 * 2.0 * 0.8).epsilon(1e-12));

  s.cells[0].motility_active = false;
  const double x0 = s.cells[0].x;
  step_mechanics(s, 0.1);
  CHECK(s.cells[0].x == x0);
}

TEST_CASE("full bias aligns workers with the guiding gradient") {
  SimConfig cfg;
  SimState s = empty_state(cfg);
  // Linear c1 field with gradient (2, 3).
  auto& c1 = s.env.field(Microenvironment::kC1);
  for (int iy = 0; iy < s.env.ny(); ++iy)
    for (int ix = 0; ix < s.env.nx(); ++ix) {
      const double x = -cfg.domain_half_width + (ix + 0.5) * cfg.dx;
      const double y = -cfg.domain_half_width + (iy + 0.5) * cfg.dx;
      c1.values[iy * s.env.nx() + ix] = 100.0 + 2.0 * x + 3.0 * y;
    }
  c1.nonzero = true;

  s.cells.push_back(worker_at(10.0, 10.0, 0.0, 0.0));
  s.cells.push_back(cargo_at(cfg, 10.0, 10.0));
  s.cells[0].attached_to = 1;
  s.cells[1].attached_to = 0;

  TherapyParams p;
  p.attached_bias = 1.0;
  p.persistence_time = 0.0;
  p.cargo_release_o2_threshold = 0.0;  // oxygen is at 38: never releases
  Rng rng(5);
  step_motility_and_adhesion(s, p, cfg, 0.1, rng);
  const double gn = std::sqrt(4.0 + 9.0);
  CHECK(s.cells[0].dir_x == doctest::Approx(2.0 / gn).epsilon(1e-12));
  CHECK(s.cells[0].dir_y == doctest::Approx(3.0 / gn).epsilon(1e-12));
  CHECK(s.cells[0].motility_active);  // attached workers always keep moving

  // Unattached workers read the cargo signal instead.
  SimState s2 = empty_state(cfg);
  auto& c2 = s2.env.field(Microenvironment::kC2);
  for (int iy = 0; iy < s2.env.ny(); ++iy)
    for (int ix = 0; ix < s2.env.nx(); ++ix) {
      const double x = -cfg.domain_half_width + (ix + 0.5) * cfg.dx;
      c2.values[iy * s2.env.nx() + ix] = 50.0 - 1.0 * x;
    }
  c2.nonzero = true;
  s2.cells.push_back(worker_at(10.0, 10.0, 0.0, 0.0));
  TherapyParams p2;
  p2.unattached_bias = 1.0;
  p2.persistence_time = 0.0;
  step_motility_and_adhesion(s2, p2, cfg, 0.1, rng);
  CHECK(s2.cells[0].dir_x == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s2.cells[0].dir_y == doctest::Approx(0.0));

  // A fully biased worker in a flat field keeps its previous heading.
  SimState s3 = empty_state(cfg);
  s3.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s3.cells[0].dir_x = 1.0;
  step_motility_and_adhesion(s3, p2, cfg, 0.1, rng);
  CHECK(s3.cells[0].dir_x == 1.0);
  CHECK(s3.cells[0].dir_y == 0.0);
}

TEST_CASE("zero bias directions are isotropic") {
  SimConfig cfg;
  SimState s = empty_state(cfg);
  fill_field(s, Microenvironment::kC2, 5.0);  // flat: gradient is zero
  s.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  TherapyParams p;
  p.unattached_bias = 0.0;
  p.persistence_time = 0.0;
  Rng rng(91);
  double sx = 0.0, sy = 0.0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    step_motility_and_adhesion(s, p, cfg, 0.1, rng);
    CHECK(std::fabs(std::hypot(s.cells[0].dir_x, s.cells[0].dir_y) - 1.0) <=
          1e-12);
    sx += s.cells[0].dir_x;
    sy += s.cells[0].dir_y;
  }
  CHECK(std::fabs(sx / trials) <= 0.02);
  CHECK(std::fabs(sy / trials) <= 0.02);
}

TEST_CASE("the c1 shutdown halts unattached workers outside the trail") {
  SimConfig cfg;
  SimState s = empty_state(cfg);
  s.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s.cells[0].motility_active = true;
  TherapyParams p;
  Rng rng(3);
  step_motility_and_adhesion(s, p, cfg, 0.1, rng);  // c1 is identically zero
  CHECK(!s.cells[0].motility_active);

  fill_field(s, Microenvironment::kC1, cfg.motility_shutdown_threshold);
  step_motility_and_adhesion(s, p, cfg, 0.1, rng);
  CHECK(s.cells[0].motility_active);
}

TEST_CASE("workers attach to the nearest receptive cargo") {
  SimConfig cfg;
  SimState s = empty_state(cfg);
  fill_field(s, Microenvironment::kC2, 1.0);  // everywhere receptive
  s.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s.cells.push_back(cargo_at(cfg, 10.0, 0.0));
  s.cells.push_back(cargo_at(cfg, 5.0, 0.0));
  TherapyParams p;
  p.cargo_release_o2_threshold = 0.0;
  Rng rng(7);
  step_motility_and_adhesion(s, p, cfg, 0.1, rng);
  CHECK(s.cells[0].attached_to == 2);  // nearest, not first
  CHECK(s.cells[2].attached_to == 0);
  CHECK(s.cells[1].attached_to == -1);

  // Equidistant candidates resolve to the lower index.
  SimState s2 = empty_state(cfg);
  fill_field(s2, Microenvironment::kC2, 1.0);
  s2.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s2.cells.push_back(cargo_at(cfg, 5.0, 0.0));
  s2.cells.push_back(cargo_at(cfg, -5.0, 0.0));
  step_motility_and_adhesion(s2, p, cfg, 0.1, rng);
  CHECK(s2.cells[0].attached_to == 1);

  // Out of reach: the attachment radius is a hard limit.
  SimState s3 = empty_state(cfg);
  fill_field(s3, Microenvironment::kC2, 1.0);
  s3.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s3.cells.push_back(cargo_at(cfg, cfg.max_attach_distance + 0.5, 0.0));
  step_motility_and_adhesion(s3, p, cfg, 0.1, rng);
  CHECK(s3.cells[0].attached_to == -1);

  // Cargo below the receptor threshold is invisible to workers. The three
  // cells sit in three different voxels so the zeroed voxel is unambiguous.
  SimState s4 = empty_state(cfg);
  fill_field(s4, Microenvironment::kC2, 1.0);
  s4.cells.push_back(worker_at(10.0, 10.0, 0.0, 0.0));
  s4.cells.push_back(cargo_at(cfg, 22.0, 10.0));  // distance 12
  s4.cells.push_back(cargo_at(cfg, 10.0, 24.0));  // distance 14
  REQUIRE(s4.env.voxel_of(22.0, 10.0) != s4.env.voxel_of(10.0, 10.0));
  REQUIRE(s4.env.voxel_of(22.0, 10.0) != s4.env.voxel_of(10.0, 24.0));
  s4.env.field(Microenvironment::kC2)
      .values[s4.env.voxel_of(22.0, 10.0)] = 0.0;
  step_motility_and_adhesion(s4, p, cfg, 0.1, rng);
  CHECK(s4.cells[0].attached_to == 2);

  // First worker in index order wins a contested cargo.
  SimState s5 = empty_state(cfg);
  fill_field(s5, Microenvironment::kC2, 1.0);
  s5.cells.push_back(worker_at(-5.0, 0.0, 0.0, 0.0));
  s5.cells.push_back(worker_at(5.0, 0.0, 0.0, 0.0));
  s5.cells.push_back(cargo_at(cfg, 0.0, 0.0));
  step_motility_and_adhesion(s5, p, cfg, 0.1, rng);
  CHECK(s5.cells[0].attached_to == 2);
  CHECK(s5.cells[2].attached_to == 0);
  CHECK(s5.cells[1].attached_to == -1);
}

TEST_CASE("cargo releases its payload at hypoxic destinations") {
  SimConfig cfg;
  SimState s = empty_state(cfg);
  s.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s.cells.push_back(cargo_at(cfg, 10.0, 0.0));
  s.cells[0].attached_to = 1;
  s.cells[1].attached_to = 0;
  fill_field(s, Microenvironment::kOxygen, 3.0);
  TherapyParams p;
  p.cargo_release_o2_threshold = 10.0;
  Rng rng(9);
  step_motility_and_adhesion(s, p, cfg, 0.1, rng);
  CHECK(s.cells[0].attached_to == -1);
  CHECK(s.cells[1].attached_to == -1);
  CHECK(s.cells[1].releasing_drug);

  // Released cargo cannot be re-attached.
  fill_field(s, Microenvironment::kC2, 1.0);
  step_motility_and_adhesion(s, p, cfg, 0.1, rng);
  CHECK(s.cells[0].attached_to == -1);

  // Above the threshold the pair stays attached.
  SimState s2 = empty_state(cfg);
  s2.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s2.cells.push_back(cargo_at(cfg, 10.0, 0.0));
  s2.cells[0].attached_to = 1;
  s2.cells[1].attached_to = 0;
  fill_field(s2, Microenvironment::kOxygen, 12.0);
  step_motility_and_adhesion(s2, p, cfg, 0.1, rng);
  CHECK(s2.cells[0].attached_to == 1);
  CHECK(!s2.cells[1].releasing_drug);
}

TEST_CASE("cell states drive the substrate sources") {
  SimConfig cfg;

  // An unattached cargo advertises itself on the c2 channel.
  SimState a = empty_state(cfg);
  a.cells.push_back(cargo_at(cfg, 0.0, 0.0));
  step_microenvironment(a, cfg.dt_diffusion);
  CHECK(a.env.value_at(Microenvironment::kC2, 0.0, 0.0) > 0.0);
  for (double v : a.env.field(Microenvironment::kDrug).values) CHECK(v == 0.0);

  // An attached cargo goes quiet on every channel.
  SimState b = empty_state(cfg);
  b.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  b.cells.push_back(cargo_at(cfg, 10.0, 0.0));
  b.cells[0].attached_to = 1;
  b.cells[1].attached_to = 0;
  step_microenvironment(b, cfg.dt_diffusion);
  for (double v : b.env.field(Microenvironment::kC2).values) CHECK(v == 0.0);
  for (double v : b.env.field(Microenvironment::kDrug).values) CHECK(v == 0.0);

  // A releasing cargo switches to the drug channel.
  SimState c = empty_state(cfg);
  c.cells.push_back(cargo_at(cfg, 0.0, 0.0));
  c.cells[0].releasing_drug = true;
  step_microenvironment(c, cfg.dt_diffusion);
  CHECK(c.env.value_at(Microenvironment::kDrug, 0.0, 0.0) > 0.0);
  for (double v : c.env.field(Microenvironment::kC2).values) CHECK(v == 0.0);

  // Tumour cells mark the c1 trail and deplete oxygen.
  SimState d = empty_state(cfg);
  d.cells.push_back(tumour_at(cfg, 0.0, 0.0));
  const double o2_before = d.env.value_at(Microenvironment::kOxygen, 0.0, 0.0);
  step_microenvironment(d, cfg.dt_diffusion);
  CHECK(d.env.value_at(Microenvironment::kC1, 0.0, 0.0) > 0.0);
  CHECK(d.env.value_at(Microenvironment::kOxygen, 0.0, 0.0) < o2_before);
}

TEST_CASE("tumour damage follows the implicit accumulation rule") {
  SimConfig cfg;
  cfg.drug_death_rate = 0.0;  // isolate the damage dynamics
  cfg.division_base_rate = 0.0;
  SimState s = empty_state(cfg);
  s.cells.push_back(tumour_at(cfg, 0.0, 0.0));
  fill_field(s, Microenvironment::kDrug, 2.0);
  Rng rng(11);
  double expected = 0.0;
  for (int n = 0; n < 10; ++n) {
    step_biology(s, cfg, cfg.dt_biology, rng);
    expected = (expected + cfg.dt_biology * cfg.damage_rate * 2.0) /
               (1.0 + cfg.dt_biology * cfg.repair_rate);
    CHECK(s.cells[0].damage == doctest::Approx(expected).epsilon(1e-12));
  }

  // With no drug the damage decays toward zero.
  fill_field(s, Microenvironment::kDrug, 0.0);
  const double peak = s.cells[0].damage;
  step_biology(s, cfg, cfg.dt_biology, rng);
  CHECK(s.cells[0].damage ==
        doctest::Approx(peak / (1.0 + cfg.dt_biology * cfg.repair_rate))
            .epsilon(1e-12));
}

TEST_CASE("hypoxia kills only after the survival window") {
  SimConfig cfg;
  cfg.division_base_rate = 0.0;
  SimState s = fresh_state(cfg);
  fill_field(s, Microenvironment::kOxygen, 3.0);  // below the death threshold
  Rng rng(13);
  const int safe_steps = static_cast<int>(cfg.hypoxia_survival_window /
                                          cfg.dt_biology);  // 30
  for (int n = 0; n < safe_steps; ++n) step_biology(s, cfg, cfg.dt_biology, rng);
  CHECK(alive_of(s, CellKind::tumour) == 37);
  step_biology(s, cfg, cfg.dt_biology, rng);
  CHECK(alive_of(s, CellKind::tumour) == 0);
  CHECK(s.cells.empty());  // the dead are compacted away

  // Re-oxygenation resets the clock.
  SimState s2 = fresh_state(cfg);
  fill_field(s2, Microenvironment::kOxygen, 3.0);
  Rng rng2(14);
  for (int n = 0; n < safe_steps; ++n)
    step_biology(s2, cfg, cfg.dt_biology, rng2);
  fill_field(s2, Microenvironment::kOxygen, 38.0);
  step_biology(s2, cfg, cfg.dt_biology, rng2);  // clock clears here
  fill_field(s2, Microenvironment::kOxygen, 3.0);
  for (int n = 0; n < safe_steps; ++n)
    step_biology(s2, cfg, cfg.dt_biology, rng2);
  CHECK(alive_of(s2, CellKind::tumour) == 37);
}

TEST_CASE("oxygen gates division") {
  SimConfig cfg;
  SimState s = fresh_state(cfg);
  fill_field(s, Microenvironment::kOxygen, 6.0);  // above death, below division
  Rng rng(17);
  for (int n = 0; n < 100; ++n) step_biology(s, cfg, cfg.dt_biology, rng);
  CHECK(s.cells.size() == 37);

  // At the far-field level the division hazard is the base rate.
  SimConfig cfg2;
  cfg2.drug_death_rate = 0.0;
  SimState s2 = empty_state(cfg2);
  for (int i = 0; i < 10000; ++i) s2.cells.push_back(tumour_at(cfg2, 0.0, 0.0));
  Rng rng2(19);
  step_biology(s2, cfg2, cfg2.dt_biology, rng2);
  const int daughters = static_cast<int>(s2.cells.size()) - 10000;
  // Expected 10000 (1 - exp(-6 * 0.00072)) = 43.1, three sigmas = 19.7.
  CHECK(daughters >= 23);
  CHECK(daughters <= 63);
  for (std::size_t i = 10000; i < s2.cells.size(); ++i) {
    const Cell& d = s2.cells[i];
    CHECK(d.kind == CellKind::tumour);
    CHECK(std::hypot(d.x, d.y) == doctest::Approx(cfg2.cell_radius).epsilon(1e-9));
  }
}

TEST_CASE("the drug death hazard matches its closed form") {
  SimConfig cfg;
  cfg.damage_rate = 0.0;  // pin the damage level
  cfg.repair_rate = 0.0;
  cfg.division_base_rate = 0.0;
  SimState s = empty_state(cfg);
  for (int i = 0; i < 10000; ++i) {
    Cell c = tumour_at(cfg, 0.0, 0.0);
    c.damage = 50.0;
    s.cells.push_back(c);
  }
  Rng rng(23);
  step_biology(s, cfg, cfg.dt_biology, rng);
  const double p = 1.0 - std::exp(-cfg.dt_biology * cfg.drug_death_rate * 50.0);
  const double frac_dead = 1.0 - s.cells.size() / 10000.0;
  CHECK(frac_dead == doctest::Approx(p).epsilon(0.02));
}

TEST_CASE("cargo apoptosis is rare but present") {
  SimConfig cfg;
  SimState s = empty_state(cfg);
  for (int i = 0; i < 10000; ++i) s.cells.push_back(cargo_at(cfg, 0.0, 0.0));
  Rng rng(29);
  for (int n = 0; n < 100; ++n) step_biology(s, cfg, cfg.dt_biology, rng);
  // Survival probability exp(-600 * 4.065e-5) = 0.9759, three sigmas = 46.
  const int survivors = static_cast<int>(s.cells.size());
  CHECK(survivors >= 9713);
  CHECK(survivors <= 9805);
}

TEST_CASE("death compaction remaps attachment partners") {
  SimConfig cfg;
  cfg.division_base_rate = 0.0;
  SimState s = empty_state(cfg);
  Cell doomed = tumour_at(cfg, 50.0, 50.0);
  doomed.damage = 1e9;  // certain death this step
  s.cells.push_back(doomed);
  s.cells.push_back(worker_at(0.0, 0.0, 0.0, 0.0));
  s.cells.push_back(cargo_at(cfg, 10.0, 0.0));
  s.cells[1].attached_to = 2;
  s.cells[2].attached_to = 1;
  cfg.damage_rate = 0.0;
  cfg.repair_rate = 0.0;
  Rng rng(31);
  step_biology(s, cfg, cfg.dt_biology, rng);
  REQUIRE(s.cells.size() == 2);
  CHECK(s.cells[0].kind == CellKind::worker);
  CHECK(s.cells[1].kind == CellKind::cargo);
  CHECK(s.cells[0].attached_to == 1);
  CHECK(s.cells[1].attached_to == 0);
}

TEST_CASE("short runs keep the population ledger consistent") {
  SimConfig cfg;
  cfg.growth_duration = 60.0;
  cfg.treatment_duration = 60.0;
  std::vector<double> observed_times;
  const SimOutcome out = run_simulation(
      cfg, TherapyParams{}, 4242,
      [&observed_times](const SimState& st) { observed_times.push_back(st.time); });

  // One count per biology step, plus the initial and post-injection samples.
  CHECK(out.counts.size() == 1 + 10 + 1 + 10);
  CHECK(out.counts.front().time == 0.0);
  CHECK(out.counts.back().time == 120.0);
  CHECK(out.tumour_cell_count == out.counts.back().tumour);
  CHECK(out.seed == 4242);

  // Workers are injected at 60 minutes and are immortal; cargo only shrinks.
  int last_cargo = -1;
  for (const CountSample& c : out.counts) {
    CHECK(c.tumour > 0);
    if (c.time < 60.0) {
      CHECK(c.workers == 0);
      CHECK(c.cargo == 0);
    }
    if (last_cargo >= 0 && c.time > 60.0) CHECK(c.cargo <= last_cargo);
    if (c.time > 60.0) last_cargo = c.cargo;
  }
  const CountSample& post_injection = out.counts[11];
  CHECK(post_injection.time == 60.0);
  CHECK(post_injection.workers == 10);
  CHECK(post_injection.cargo == 90);

  // Snapshots at the configured cadence, with a forced duplicate at the end.
  CHECK(observed_times ==
        std::vector<double>{0.0, 30.0, 60.0, 90.0, 120.0, 120.0});
}

TEST_CASE("identical seeds reproduce a run exactly") {
  SimConfig cfg;
  cfg.growth_duration = 120.0;
  cfg.treatment_duration = 120.0;
  const SimOutcome a = run_simulation(cfg, TherapyParams{}, 77);
  const SimOutcome b = run_simulation(cfg, TherapyParams{}, 77);
  CHECK(a.tumour_cell_count == b.tumour_cell_count);
  REQUIRE(a.counts.size() == b.counts.size());
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    CHECK(a.counts[i].time == b.counts[i].time);
    CHECK(a.counts[i].tumour == b.counts[i].tumour);
    CHECK(a.counts[i].workers == b.counts[i].workers);
    CHECK(a.counts[i].cargo == b.counts[i].cargo);
  }
}

TEST_CASE("delivered therapy beats no therapy on the full schedule") {
  const SimConfig cfg;
  const SimOutcome treated = run_simulation(cfg, TherapyParams{}, 99);

  SimConfig untreated_cfg = cfg;
  untreated_cfg.injected_cells = 0;
  const SimOutcome untreated = run_simulation(untreated_cfg, TherapyParams{}, 99);

  CHECK(treated.tumour_cell_count > 0);
  CHECK(treated.tumour_cell_count < untreated.tumour_cell_count);

  // A different seed gives a genuinely different trajectory.
  const SimOutcome other = run_simulation(cfg, TherapyParams{}, 7);
  bool any_difference = other.tumour_cell_count != treated.tumour_cell_count;
  for (std::size_t i = 0;
       !any_difference && i < std::min(other.counts.size(), treated.counts.size());
       ++i)
    any_difference = other.counts[i].tumour != treated.counts[i].tumour ||
                     other.counts[i].cargo != treated.counts[i].cargo;
  CHECK(any_difference);
}

TEST_CASE("the objective adapter scores genotypes deterministically") {
  SimConfig cfg;
  cfg.growth_duration = 24.0;
  cfg.treatment_duration = 24.0;
  const auto objective = objective_adapter(cfg);
  const Genotype mid(6, 0.0);
  const double f1 = objective(mid, 123);
  CHECK(f1 == objective(mid, 123));
  CHECK(f1 == std::floor(f1));  // cell counts are integers
  CHECK(f1 > 0.0);

  // The midpoint genotype must decode to the default therapy parameters.
  const SimOutcome direct = run_simulation(cfg, TherapyParams{}, 123);
  CHECK(f1 == static_cast<double>(direct.tumour_cell_count));

  SimConfig all_cells = cfg;
  all_cells.count_all_cells = true;
  const double f_all = objective_adapter(all_cells)(mid, 123);
  CHECK(f_all > f1);  // workers and cargo join the count

  CHECK_THROWS_AS(objective(Genotype(4, 0.0), 1), std::invalid_argument);
}
