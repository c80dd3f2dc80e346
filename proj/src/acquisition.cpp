#include "saga/acquisition.hpp"

#include <algorithm>
#include <stdexcept>

#include "saga/stats.hpp"

namespace saga {

double expected_improvement(double mean, double std, double best) {
  if (std < 0.0) throw std::invalid_argument("negative predictive std");
  if (std == 0.0) return 0.0;
  const double imp = best - mean;
  const double z = imp / std;
  const double ei = imp * normal_cdf(z) + std * normal_pdf(z);
  return std::max(0.0, ei);
}

double rate_candidate(const GpModel& model, const Genotype& g, double best) {
  const Prediction p = gp_predict(model, g);
  return expected_improvement(p.mean, p.std, best);
}

double rate_candidate(const MlpModel& model, const Genotype& g,
                      double /*best*/) {
  return -mlp_predict(model, g);
}

double rate_candidate(const SurrogateModel& model, const Genotype& g,
                      double best) {
  return std::visit(
      [&](const auto& m) { return rate_candidate(m, g, best); }, model);
}

}  // namespace saga
