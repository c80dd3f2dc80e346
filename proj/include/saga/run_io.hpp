#ifndef SAGA_RUN_IO_HPP
#define SAGA_RUN_IO_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "saga/archive.hpp"
#include "saga/evolution.hpp"

namespace saga {

/// Shortest-round-trip-safe decimal rendering (%.17g). Identical doubles
/// always render to identical bytes, so rerun artifacts diff clean.
std::string format_double(double value);

/// Exact inverse of format_double; throws DataError on malformed text.
double parse_double(const std::string& text);

/// Artifact locations inside one run's output directory.
struct RunPaths {
  std::filesystem::path archive;
  std::filesystem::path best_trace;
  std::filesystem::path summary;
  std::filesystem::path config_echo;
};
RunPaths run_paths(const std::filesystem::path& dir);

/// Comma-separated archive table: one row per evaluation, header
/// evaluation_index,gene_0..gene_{N-1},sample_0..sample_{k-1},mean_fitness.
/// Genes are normalized coordinates in [-1,1].
void write_archive_csv(const std::filesystem::path& path,
                       const Archive& archive);

/// Parses a table produced by write_archive_csv. Gene and sample counts are
/// inferred from the header. Throws DataError on missing file, malformed
/// header, or row shape mismatch.
Archive read_archive_csv(const std::filesystem::path& path);

/// Comma-separated running-best table with header
/// evaluation_index,best_mean_fitness.
void write_best_trace_csv(const std::filesystem::path& path,
                          const std::vector<double>& best_trace);

std::vector<double> read_best_trace_csv(const std::filesystem::path& path);

/// One "key = value" per line. Keys render verbatim, values through
/// format_double when numeric.
void write_key_values(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& entries);

/// Parses a write_key_values document, preserving order. Blank lines and
/// lines starting with '#' are skipped.
std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::filesystem::path& path);

/// Human-readable run digest: algorithm, seed, budget, best candidate in
/// both normalized and physical units, timing, surrogate state.
void write_summary(const std::filesystem::path& path, const RunResult& result);

}  // namespace saga

#endif
