#ifndef SAGA_ARCHIVE_HPP
#define SAGA_ARCHIVE_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "saga/param_space.hpp"

namespace saga {

/// One scored candidate: every evaluation appends exactly one record.
struct ArchiveRecord {
  Genotype genotype;            // normalized coordinates in [-1,1]
  std::vector<double> samples;  // raw replicate fitnesses
  double mean_fitness = 0.0;    // mean of samples; the selection fitness
  int evaluation_index = 0;     // 0-based evaluation order
};

using Archive = std::vector<ArchiveRecord>;

/// Index of the lowest mean_fitness record; ties keep the earliest.
inline std::size_t best_record_index(const Archive& archive) {
  if (archive.empty()) throw std::invalid_argument("empty archive");
  std::size_t best = 0;
  for (std::size_t i = 1; i < archive.size(); ++i)
    if (archive[i].mean_fitness < archive[best].mean_fitness) best = i;
  return best;
}

}  // namespace saga

#endif
