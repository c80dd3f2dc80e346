#ifndef SAGA_ACQUISITION_HPP
#define SAGA_ACQUISITION_HPP

#include <variant>

#include "saga/gp.hpp"
#include "saga/mlp.hpp"

namespace saga {

/// Expected improvement below `best` when the unknown value is distributed
/// N(mean, std^2). Minimization convention: improvement = best - mean.
/// std == 0 collapses to zero (a certain prediction cannot be expected to
/// improve); std < 0 throws std::invalid_argument. Clamped at zero against
/// rounding.
double expected_improvement(double mean, double std, double best);

using SurrogateModel = std::variant<GpModel, MlpModel>;

/// Pre-selection rating; higher is picked first. The probabilistic model
/// rates by expected improvement over the archive best; the point-prediction
/// model rates by the negated predicted fitness, so the lowest prediction
/// wins.
double rate_candidate(const GpModel& model, const Genotype& g, double best);
double rate_candidate(const MlpModel& model, const Genotype& g, double best);
double rate_candidate(const SurrogateModel& model, const Genotype& g,
                      double best);

}  // namespace saga

#endif
