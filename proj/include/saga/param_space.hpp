#ifndef SAGA_PARAM_SPACE_HPP
#define SAGA_PARAM_SPACE_HPP

#include <string>
#include <vector>

#include "saga/rng.hpp"

namespace saga {

/// A candidate solution, normalized to [-1,1] per component.
using Genotype = std::vector<double>;

/// One physical search dimension with box bounds.
struct ParameterSpec {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  std::string units;
};

/// The six evolvable biophysical therapy parameters, in canonical order.
/// Archives and output tables are column-stable because this order is fixed.
const std::vector<ParameterSpec>& canonical_space();

/// Map a normalized genotype to physical units:
/// p_i = lower_i + (g_i + 1)/2 * (upper_i - lower_i).
std::vector<double> denormalize(const Genotype& g,
                                const std::vector<ParameterSpec>& space);

/// Exact inverse of denormalize; throws if a component is out of bounds.
Genotype normalize(const std::vector<double>& physical,
                   const std::vector<ParameterSpec>& space);

/// Uniform draw from [-1,1]^n.
Genotype random_genotype(Rng& rng, std::size_t n);

}  // namespace saga

#endif
