#include "saga/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace saga {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

SampleSummary summarize(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("summarize: empty sample");
  const int n = static_cast<int>(samples.size());
  SampleSummary s;
  s.n = n;

  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / n;

  double m2 = 0.0;
  for (double v : samples) m2 += (v - s.mean) * (v - s.mean);
  s.sd = n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0;

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.median = (n % 2 == 1) ? sorted[n / 2]
                          : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  if (n >= 4 && s.sd > 0.0) {
    double z4 = 0.0;
    for (double v : samples) {
      const double z = (v - s.mean) / s.sd;
      z4 += z * z * z * z;
    }
    const double nn = n;
    const double a = nn * (nn + 1.0) / ((nn - 1.0) * (nn - 2.0) * (nn - 3.0));
    const double b = 3.0 * (nn - 1.0) * (nn - 1.0) / ((nn - 2.0) * (nn - 3.0));
    s.excess_kurtosis = a * z4 - b;
  }
  return s;
}

namespace {

// Midranks of the pooled sample; returns (ranks for a, ranks for b) folded
// into one vector ordered a-first, plus the tie group sizes.
struct PooledRanks {
  std::vector<double> ranks;  // size na+nb, first na entries belong to a
  std::vector<int> tie_sizes;
};

PooledRanks pooled_midranks(const std::vector<double>& a,
                            const std::vector<double>& b) {
  const int na = static_cast<int>(a.size());
  const int n = na + static_cast<int>(b.size());
  std::vector<std::pair<double, int>> pool;  // (value, original slot)
  pool.reserve(n);
  for (int i = 0; i < na; ++i) pool.emplace_back(a[i], i);
  for (std::size_t i = 0; i < b.size(); ++i)
    pool.emplace_back(b[i], na + static_cast<int>(i));
  std::sort(pool.begin(), pool.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  PooledRanks out;
  out.ranks.assign(n, 0.0);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && pool[j + 1].first == pool[i].first) ++j;
    const double midrank = 0.5 * (i + j) + 1.0;  // ranks are 1-based
    for (int t = i; t <= j; ++t) out.ranks[pool[t].second] = midrank;
    out.tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return out;
}

double rank_sum_of_a(const PooledRanks& pr, int na) {
  double w = 0.0;
  for (int i = 0; i < na; ++i) w += pr.ranks[i];
  return w;
}

// Tail probabilities of the permutation distribution of the rank sum:
// enumerate all size-na subsets of the pooled ranks.
struct ExactTails {
  double p_low = 1.0;      // P(W <= w)
  double p_high = 1.0;     // P(W >= w)
  double p_extreme = 1.0;  // P(|W - E[W]| >= |w - E[W]|)
};

ExactTails exact_tails(const std::vector<double>& ranks, int na, double w) {
  const int n = static_cast<int>(ranks.size());
  const double eps = 1e-9;
  // Midranks preserve the pooled total, so E[W] keeps its tie-free form.
  const double mean = na * (n + 1.0) / 2.0;
  const double dev = std::abs(w - mean);
  long long total = 0, low = 0, high = 0, extreme = 0;

  std::vector<int> idx(na);
  for (int i = 0; i < na; ++i) idx[i] = i;
  while (true) {
    double sum = 0.0;
    for (int i : idx) sum += ranks[i];
    ++total;
    if (sum <= w + eps) ++low;
    if (sum >= w - eps) ++high;
    if (std::abs(sum - mean) >= dev - eps) ++extreme;

    // next lexicographic combination
    int i = na - 1;
    while (i >= 0 && idx[i] == n - na + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < na; ++j) idx[j] = idx[j - 1] + 1;
  }
  return {static_cast<double>(low) / total, static_cast<double>(high) / total,
          static_cast<double>(extreme) / total};
}

struct ApproxMoments {
  double mean = 0.0;
  double var = 0.0;
};

ApproxMoments approx_moments(const PooledRanks& pr, int na, int nb) {
  const double n = na + nb;
  double tie_term = 0.0;
  for (int t : pr.tie_sizes)
    tie_term += static_cast<double>(t) * t * t - t;
  ApproxMoments m;
  m.mean = na * (n + 1.0) / 2.0;
  m.var = (static_cast<double>(na) * nb / 12.0) *
          ((n + 1.0) - tie_term / (n * (n - 1.0)));
  return m;
}

void check_nonempty(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("wilcoxon_rank_sum: empty sample");
}

}  // namespace

WilcoxonResult wilcoxon_rank_sum_exact(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  check_nonempty(a, b);
  const int na = static_cast<int>(a.size());
  const PooledRanks pr = pooled_midranks(a, b);
  const double w = rank_sum_of_a(pr, na);
  const ExactTails t = exact_tails(pr.ranks, na, w);
  WilcoxonResult r;
  r.statistic = w;
  r.p_two_sided = t.p_extreme;
  r.exact = true;
  return r;
}

WilcoxonResult wilcoxon_rank_sum_approx(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  check_nonempty(a, b);
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  const PooledRanks pr = pooled_midranks(a, b);
  const double w = rank_sum_of_a(pr, na);
  const ApproxMoments m = approx_moments(pr, na, nb);

  WilcoxonResult r;
  r.statistic = w;
  r.exact = false;
  if (m.var <= 0.0) {
    r.p_two_sided = 1.0;  // every permutation gives the same rank sum
    return r;
  }
  // continuity correction: shift |W - E| by 0.5 toward the mean, never across
  const double d = std::max(0.0, std::abs(w - m.mean) - 0.5);
  const double z = d / std::sqrt(m.var);
  // erfc keeps the far tail positive where 1 - cdf would round to zero
  r.p_two_sided = std::min(1.0, std::erfc(z * M_SQRT1_2));
  return r;
}

WilcoxonResult wilcoxon_rank_sum(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  check_nonempty(a, b);
  if (a.size() + b.size() <= 12) return wilcoxon_rank_sum_exact(a, b);
  return wilcoxon_rank_sum_approx(a, b);
}

double wilcoxon_rank_sum_one_sided_less(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  check_nonempty(a, b);
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  const PooledRanks pr = pooled_midranks(a, b);
  const double w = rank_sum_of_a(pr, na);
  if (a.size() + b.size() <= 12) {
    return exact_tails(pr.ranks, na, w).p_low;
  }
  const ApproxMoments m = approx_moments(pr, na, nb);
  if (m.var <= 0.0) return 1.0;
  const double z = (w - m.mean + 0.5) / std::sqrt(m.var);
  return normal_cdf(z);
}

}  // namespace saga
