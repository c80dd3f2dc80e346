#include "saga/run_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "saga/errors.hpp"
#include "saga/stats.hpp"

namespace saga {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

/// Count of consecutive header columns named prefix0, prefix1, ...
std::size_t count_prefixed(const std::vector<std::string>& header,
                           std::size_t from, const std::string& prefix) {
  std::size_t n = 0;
  while (from + n < header.size() &&
         header[from + n] == prefix + std::to_string(n))
    ++n;
  return n;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  // ERANGE with a finite value is gradual underflow (subnormals round-trip);
  // only overflow to infinity is malformed.
  if (end == text.c_str() || *end != '\0' ||
      (errno == ERANGE && std::fabs(value) == HUGE_VAL))
    throw DataError("malformed number \"" + text + "\"");
  return value;
}

RunPaths run_paths(const std::filesystem::path& dir) {
  return {dir / "archive.csv", dir / "best_trace.csv", dir / "summary.txt",
          dir / "config_echo.txt"};
}

void write_archive_csv(const std::filesystem::path& path,
                       const Archive& archive) {
  std::ofstream out = open_out(path);
  const std::size_t genes = archive.empty() ? 0 : archive[0].genotype.size();
  const std::size_t k = archive.empty() ? 0 : archive[0].samples.size();
  out << "evaluation_index";
  for (std::size_t i = 0; i < genes; ++i) out << ",gene_" << i;
  for (std::size_t i = 0; i < k; ++i) out << ",sample_" << i;
  out << ",mean_fitness\n";
  for (const ArchiveRecord& rec : archive) {
    if (rec.genotype.size() != genes || rec.samples.size() != k)
      throw DataError("archive rows disagree on gene or sample count");
    out << rec.evaluation_index;
    for (double g : rec.genotype) out << ',' << format_double(g);
    for (double s : rec.samples) out << ',' << format_double(s);
    out << ',' << format_double(rec.mean_fitness) << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Archive read_archive_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path.string() + " is empty");
  const std::vector<std::string> header = split_csv(line);
  if (header.empty() || header[0] != "evaluation_index")
    throw DataError(path.string() + " has an unrecognized header");
  const std::size_t genes = count_prefixed(header, 1, "gene_");
  const std::size_t k = count_prefixed(header, 1 + genes, "sample_");
  // genes == k == 0 is the legitimate header of an empty archive.
  if ((genes == 0) != (k == 0) || header.size() != 2 + genes + k ||
      header.back() != "mean_fitness")
    throw DataError(path.string() + " has an unrecognized header");

  Archive archive;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size())
      throw DataError(path.string() + " row " +
                      std::to_string(archive.size() + 1) +
                      " has the wrong field count");
    ArchiveRecord rec;
    rec.evaluation_index = static_cast<int>(parse_double(fields[0]));
    rec.genotype.resize(genes);
    for (std::size_t i = 0; i < genes; ++i)
      rec.genotype[i] = parse_double(fields[1 + i]);
    rec.samples.resize(k);
    for (std::size_t i = 0; i < k; ++i)
      rec.samples[i] = parse_double(fields[1 + genes + i]);
    rec.mean_fitness = parse_double(fields.back());
    archive.push_back(std::move(rec));
  }
  return archive;
}

void write_best_trace_csv(const std::filesystem::path& path,
                          const std::vector<double>& best_trace) {
  std::ofstream out = open_out(path);
  out << "evaluation_index,best_mean_fitness\n";
  for (std::size_t i = 0; i < best_trace.size(); ++i)
    out << i << ',' << format_double(best_trace[i]) << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<double> read_best_trace_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "evaluation_index,best_mean_fitness")
    throw DataError(path.string() + " has an unrecognized header");
  std::vector<double> trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 2)
      throw DataError(path.string() + " has a malformed row");
    trace.push_back(parse_double(fields[1]));
  }
  return trace;
}

void write_key_values(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out = open_out(path);
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": empty key");
    entries.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return entries;
}

void write_summary(const std::filesystem::path& path,
                   const RunResult& result) {
  std::vector<std::pair<std::string, std::string>> entries;
  entries.emplace_back("algorithm", result.algorithm);
  entries.emplace_back("run_seed", std::to_string(result.run_seed));
  entries.emplace_back("evaluations", std::to_string(result.archive.size()));
  const ArchiveRecord& best = result.archive[best_record_index(result.archive)];
  entries.emplace_back("best_evaluation_index",
                       std::to_string(best.evaluation_index));
  entries.emplace_back("best_mean_fitness", format_double(best.mean_fitness));
  {
    std::ostringstream genes, physical;
    const std::vector<ParameterSpec> space = canonical_space();
    const std::vector<double> values =
        best.genotype.size() == space.size()
            ? denormalize(best.genotype, space)
            : std::vector<double>();
    for (std::size_t i = 0; i < best.genotype.size(); ++i) {
      if (i) genes << ' ';
      genes << format_double(best.genotype[i]);
    }
    entries.emplace_back("best_genotype", genes.str());
    for (std::size_t i = 0; i < values.size(); ++i) {
      entries.emplace_back("best_" + space[i].name, format_double(values[i]));
    }
  }
  const SampleSummary stats = summarize(best.samples);
  entries.emplace_back("best_sample_mean", format_double(stats.mean));
  entries.emplace_back("best_sample_sd", format_double(stats.sd));
  entries.emplace_back("best_sample_min", format_double(stats.min));
  entries.emplace_back("best_sample_median", format_double(stats.median));
  entries.emplace_back("best_sample_kurtosis",
                       stats.excess_kurtosis
                           ? format_double(*stats.excess_kurtosis)
                           : std::string("undefined"));
  entries.emplace_back("model_failures",
                       std::to_string(result.model_failures));
  if (!result.model_description.empty())
    entries.emplace_back("final_model", result.model_description);
  entries.emplace_back("wall_time_seconds",
                       format_double(result.wall_time_seconds));
  write_key_values(path, entries);
}

}  // namespace saga
