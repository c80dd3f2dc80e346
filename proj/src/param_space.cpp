#include "saga/param_space.hpp"

#include <sstream>
#include <stdexcept>

namespace saga {

const std::vector<ParameterSpec>& canonical_space() {
  static const std::vector<ParameterSpec> space = {
      {"attached_worker_migration_bias", 0.0, 1.0, ""},
      {"unattached_worker_migration_bias", 0.0, 1.0, ""},
      {"worker_relative_adhesion", 0.0, 10.0, ""},
      {"worker_relative_repulsion", 0.0, 10.0, ""},
      {"worker_motility_persistence_time", 0.0, 10.0, "minutes"},
      {"cargo_release_o2_threshold", 0.0, 20.0, "mmHg"},
  };
  return space;
}

std::vector<double> denormalize(const Genotype& g,
                                const std::vector<ParameterSpec>& space) {
  if (g.size() != space.size()) {
    std::ostringstream msg;
    msg << "denormalize: genotype has " << g.size() << " components, space has "
        << space.size();
    throw std::invalid_argument(msg.str());
  }
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = space[i].lower + 0.5 * (g[i] + 1.0) * (space[i].upper - space[i].lower);
  }
  return out;
}

Genotype normalize(const std::vector<double>& physical,
                   const std::vector<ParameterSpec>& space) {
  if (physical.size() != space.size()) {
    std::ostringstream msg;
    msg << "normalize: vector has " << physical.size() << " components, space has "
        << space.size();
    throw std::invalid_argument(msg.str());
  }
  Genotype out(physical.size());
  for (std::size_t i = 0; i < physical.size(); ++i) {
    if (physical[i] < space[i].lower || physical[i] > space[i].upper) {
      std::ostringstream msg;
      msg << "normalize: " << space[i].name << " = " << physical[i]
          << " outside [" << space[i].lower << ", " << space[i].upper << "]";
      throw std::out_of_range(msg.str());
    }
    out[i] = 2.0 * (physical[i] - space[i].lower) /
                 (space[i].upper - space[i].lower) - 1.0;
  }
  return out;
}

Genotype random_genotype(Rng& rng, std::size_t n) {
  Genotype g(n);
  for (auto& v : g) v = rng.uniform(-1.0, 1.0);
  return g;
}

}  // namespace saga
