#ifndef SAGA_STATS_HPP
#define SAGA_STATS_HPP

#include <optional>
#include <vector>

namespace saga {

/// Descriptive statistics of one sample. excess_kurtosis is empty when the
/// statistic is undefined (n < 4 or sd = 0); the convention is Fisher's
/// excess kurtosis with the standard small-sample bias correction.
struct SampleSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample SD, n-1 denominator
  double median = 0.0;
  double min = 0.0;
  std::optional<double> excess_kurtosis;
  int n = 0;
};

SampleSummary summarize(const std::vector<double>& samples);

struct WilcoxonResult {
  double statistic = 0.0;  // rank sum of the first sample, midranks for ties
  double p_two_sided = 1.0;
  bool exact = false;  // true when computed by exhaustive enumeration
};

/// Two-sided Wilcoxon rank-sum test. Exhaustive enumeration when the pooled
/// size is at most 12, otherwise a normal approximation with continuity
/// correction and tie-adjusted variance.
WilcoxonResult wilcoxon_rank_sum(const std::vector<double>& a,
                                 const std::vector<double>& b);

/// Forced code paths, mainly for cross-checking one against the other.
WilcoxonResult wilcoxon_rank_sum_exact(const std::vector<double>& a,
                                       const std::vector<double>& b);
WilcoxonResult wilcoxon_rank_sum_approx(const std::vector<double>& a,
                                        const std::vector<double>& b);

/// One-sided p-value for the alternative "a tends lower than b".
/// Same exact/approximate switching as the two-sided test.
double wilcoxon_rank_sum_one_sided_less(const std::vector<double>& a,
                                        const std::vector<double>& b);

/// Standard normal CDF and density.
double normal_cdf(double z);
double normal_pdf(double z);

}  // namespace saga

#endif
