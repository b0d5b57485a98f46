#include "svagent/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "svagent/types.hpp"

namespace svagent {

namespace {

std::vector<double> differences(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ConfigError("paired test: length mismatch, " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  if (a.size() < 2) throw ConfigError("paired test: need at least 2 paired observations");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

double paired_t_one_sided(std::span<const double> a, std::span<const double> b) {
  const auto d = differences(a, b);
  const double n = static_cast<double>(d.size());
  const double mean = mean_of(d);
  const double sd = sample_std(d, mean);

  const bool all_zero = std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; });
  if (all_zero) return 1.0;
  if (sd == 0.0) return mean > 0.0 ? 0.0 : 1.0;

  const double t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(n - 1.0);
  return boost::math::cdf(boost::math::complement(dist, t));
}

WilcoxonStat wilcoxon_statistic(std::span<const double> a, std::span<const double> b) {
  const auto d = differences(a, b);

  struct Item {
    double abs_d;
    bool positive;
  };
  std::vector<Item> items;
  for (double x : d)
    if (x != 0.0) items.push_back({std::abs(x), x > 0.0});
  std::sort(items.begin(), items.end(),
            [](const Item& l, const Item& r) { return l.abs_d < r.abs_d; });

  WilcoxonStat stat;
  stat.m = static_cast<int>(items.size());
  stat.ranks.resize(items.size());

  // Average ranks across ties.
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    while (j + 1 < items.size() && items[j + 1].abs_d == items[i].abs_d) ++j;
    const double avg_rank = static_cast<double>(i + 1 + j + 1) / 2.0;
    for (std::size_t t = i; t <= j; ++t) stat.ranks[t] = avg_rank;
    i = j + 1;
  }
  for (std::size_t t = 0; t < items.size(); ++t)
    if (items[t].positive) stat.w_plus += stat.ranks[t];
  return stat;
}

double wilcoxon_signed_rank_one_sided(std::span<const double> a, std::span<const double> b) {
  const auto stat = wilcoxon_statistic(a, b);
  const int m = stat.m;
  if (m == 0) return 1.0;  // every difference was zero

  if (m <= 20) {
    // Exact null distribution: every sign vector equally likely.
    const std::uint64_t total = 1ull << m;
    std::uint64_t at_least = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      double w = 0.0;
      for (int bit = 0; bit < m; ++bit)
        if (mask & (1ull << bit)) w += stat.ranks[static_cast<std::size_t>(bit)];
      if (w >= stat.w_plus) ++at_least;
    }
    return static_cast<double>(at_least) / static_cast<double>(total);
  }

  // Normal approximation with tie-corrected variance and continuity correction.
  const double md = static_cast<double>(m);
  const double mu = md * (md + 1.0) / 4.0;
  double var = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0;
  std::size_t i = 0;
  while (i < stat.ranks.size()) {
    std::size_t j = i;
    while (j + 1 < stat.ranks.size() && stat.ranks[j + 1] == stat.ranks[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    if (t > 1.0) var -= t * (t * t - 1.0) / 48.0;
    i = j + 1;
  }
  const double z = (stat.w_plus - mu - 0.5) / std::sqrt(var);
  return normal_sf(z);
}

SignificanceReport significance_report(std::span<const double> a, std::span<const double> b) {
  SignificanceReport rep;
  rep.t_p = paired_t_one_sided(a, b);
  rep.wilcoxon_p = wilcoxon_signed_rank_one_sided(a, b);
  rep.n_runs = static_cast<int>(a.size());

  std::vector<double> va(a.begin(), a.end());
  std::vector<double> vb(b.begin(), b.end());
  rep.mean_a = mean_of(va);
  rep.mean_b = mean_of(vb);
  rep.std_a = sample_std(va, rep.mean_a);
  rep.std_b = sample_std(vb, rep.mean_b);
  return rep;
}

}  // namespace svagent
