#pragma once

#include <span>
#include <vector>

namespace svagent {

/// One-sided paired t-test on d = a - b with H1: mean(d) > 0.
/// Degenerate rules: all-zero differences give p = 1; zero sample std with
/// nonzero mean gives p = 0 (mean > 0) or p = 1 (mean < 0).
double paired_t_one_sided(std::span<const double> a, std::span<const double> b);

/// One-sided Wilcoxon signed-rank test on d = a - b, large-W+ direction.
/// Zero differences are dropped; |d| is ranked with average ranks on ties.
/// The p-value is exact (full 2^m sign enumeration) for m <= 20 and a normal
/// approximation with tie-corrected variance and continuity correction above.
double wilcoxon_signed_rank_one_sided(std::span<const double> a, std::span<const double> b);

/// Internal pieces exposed for testing and reporting.
struct WilcoxonStat {
  double w_plus = 0.0;
  int m = 0;  ///< nonzero differences
  std::vector<double> ranks;
};
WilcoxonStat wilcoxon_statistic(std::span<const double> a, std::span<const double> b);

struct SignificanceReport {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double std_a = 0.0;  ///< sample std, n-1 denominator
  double std_b = 0.0;
  double t_p = 1.0;
  double wilcoxon_p = 1.0;
  int n_runs = 0;
};

/// Paired comparison of per-run scores, a = method, b = baseline
/// (the one-sided alternative is "a beats b").
SignificanceReport significance_report(std::span<const double> a, std::span<const double> b);

}  // namespace svagent
