#pragma once

// Nonparametric tests, effect sizes and the interpretation tables used to
// compare classifiers and metric distributions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "dpeval/error.hpp"

namespace dpeval {

enum class PMethod { Exact, Approximation };

inline const char* to_string(PMethod m) {
  return m == PMethod::Exact ? "exact" : "approximation";
}

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  PMethod method = PMethod::Exact;
  std::size_t n_effective = 0;
};

struct EffectSize {
  double value = 0.0;
  std::string label;
};

enum class InterpretationTable { Cliffs, Spearman, CohensD, Kappa };

/// Label for `value` per the interpretation table; lower bounds inclusive.
/// Cliff's delta, Spearman and Cohen's d are read on |value|.
inline std::string interpret(double value, InterpretationTable table) {
  switch (table) {
    case InterpretationTable::Cliffs: {
      const double a = std::abs(value);
      if (a >= 0.43) return "Large";
      if (a >= 0.28) return "Medium";
      if (a >= 0.11) return "Small";
      return "negligible";
    }
    case InterpretationTable::Spearman: {
      const double a = std::abs(value);
      if (a >= 1.0) return "perfect";
      if (a >= 0.8) return "very strong";  // also covers [0.9, 1)
      if (a >= 0.6) return "moderate";
      return "fair";
    }
    case InterpretationTable::CohensD: {
      const double a = std::abs(value);
      if (a >= 0.80) return "Very Large";
      if (a >= 0.50) return "Large";
      if (a >= 0.20) return "Medium";
      if (a >= 0.01) return "Small";
      return "Very small";
    }
    case InterpretationTable::Kappa:
      if (value < 0.0) return "No agreement";
      if (value < 0.4) return "Poor agreement";
      if (value < 0.6) return "Discrete agreement";
      if (value < 0.8) return "Good agreement";
      return "Excellent agreement";
  }
  return {};
}

/// Average ranks (1-based), ties sharing the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

/// Sizes of tie groups among `values` (groups of one included).
inline std::vector<std::size_t> tie_groups(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::vector<std::size_t> groups;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i + 1;
    while (j < v.size() && v[j] == v[i]) ++j;
    groups.push_back(j - i);
    i = j;
  }
  return groups;
}

inline double normal_two_sided_p(double z) {
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

struct WilcoxonOptions {
  std::size_t exact_max_n = 20;  ///< exact null distribution up to this n
};

inline constexpr std::size_t kMaxExactEnumeration = 25;

/// Two-sided paired test. Zero differences are dropped, tied |d| share average
/// ranks. The statistic is W+, the rank sum of positive differences.
inline TestResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs,
                                       WilcoxonOptions options = {}) {
  if (options.exact_max_n > kMaxExactEnumeration)
    throw InvalidArgument("exact Wilcoxon is capped at n = 25");
  std::vector<double> diffs;
  for (const auto& [a, b] : pairs) {
    const double d = a - b;
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n == 0) throw UndefinedMetric("no informative pairs");

  std::vector<double> abs_d(n);
  std::transform(diffs.begin(), diffs.end(), abs_d.begin(), [](double d) { return std::abs(d); });
  const auto ranks = average_ranks(abs_d);

  // Doubled ranks are integers, so the statistic is exact.
  std::vector<std::size_t> rank_x2(n);
  std::size_t w_plus_x2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rank_x2[i] = static_cast<std::size_t>(std::lround(ranks[i] * 2.0));
    if (diffs[i] > 0) w_plus_x2 += rank_x2[i];
  }

  TestResult out;
  out.statistic = static_cast<double>(w_plus_x2) / 2.0;
  out.n_effective = n;

  if (n <= options.exact_max_n) {
    // Count the 2^n sign assignments by attained doubled rank sum.
    const std::size_t max_sum = std::accumulate(rank_x2.begin(), rank_x2.end(), std::size_t{0});
    std::vector<std::uint64_t> count(max_sum + 1, 0);
    count[0] = 1;
    std::size_t reach = 0;
    for (std::size_t r : rank_x2) {
      for (std::size_t s = reach + 1; s-- > 0;)
        if (count[s]) count[s + r] += count[s];
      reach += r;
    }
    std::uint64_t le = 0, ge = 0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      if (s <= w_plus_x2) le += count[s];
      if (s >= w_plus_x2) ge += count[s];
    }
    const double total = std::ldexp(1.0, static_cast<int>(n));
    out.p_value = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / total);
    out.method = PMethod::Exact;
    return out;
  }

  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
  for (std::size_t t : tie_groups(abs_d)) {
    const double td = static_cast<double>(t);
    var -= (td * td * td - td) / 48.0;
  }
  const double dev = std::max(0.0, std::abs(out.statistic - mean) - 0.5);
  out.p_value = var > 0.0 ? normal_two_sided_p(dev / std::sqrt(var)) : 1.0;
  out.method = PMethod::Approximation;
  return out;
}

// ---------------------------------------------------------------------------
// Effect sizes

/// Cliff's delta over all cross pairs: (#x>y - #x<y) / (|x||y|).
inline EffectSize cliffs_delta(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw InvalidArgument("Cliff's delta needs non-empty samples");
  std::vector<double> ys(y.begin(), y.end());
  std::sort(ys.begin(), ys.end());
  long long dominance = 0;
  for (double xi : x) {
    const auto lo = std::lower_bound(ys.begin(), ys.end(), xi);
    const auto hi = std::upper_bound(lo, ys.end(), xi);
    const long long below = lo - ys.begin();
    const long long above = ys.end() - hi;
    dominance += below - above;
  }
  const double d = static_cast<double>(dominance) /
                   (static_cast<double>(x.size()) * static_cast<double>(y.size()));
  return {d, interpret(d, InterpretationTable::Cliffs)};
}

/// Within-pair variant: (#x_i>y_i - #x_i<y_i) / n.
inline EffectSize cliffs_delta_paired(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw InvalidArgument("Cliff's delta needs non-empty samples");
  long long dominance = 0;
  for (const auto& [a, b] : pairs) dominance += (a > b) - (a < b);
  const double d = static_cast<double>(dominance) / static_cast<double>(pairs.size());
  return {d, interpret(d, InterpretationTable::Cliffs)};
}

namespace detail {
inline std::pair<double, double> mean_and_ss(std::span<const double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, ss};
}
}  // namespace detail

/// |mean(x) - mean(y)| / pooled standard deviation (n - 1 weighting).
inline EffectSize cohens_d(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2)
    throw InvalidArgument("Cohen's d needs at least two values per sample");
  const auto [mx, ssx] = detail::mean_and_ss(x);
  const auto [my, ssy] = detail::mean_and_ss(y);
  const double pooled_var = (ssx + ssy) / static_cast<double>(x.size() + y.size() - 2);
  if (!(pooled_var > 0.0)) throw UndefinedMetric("Cohen's d undefined: zero pooled variance");
  const double d = std::abs(mx - my) / std::sqrt(pooled_var);
  return {d, interpret(d, InterpretationTable::CohensD)};
}

// ---------------------------------------------------------------------------
// Spearman

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  PMethod method = PMethod::Exact;
  std::string label;
};

inline constexpr std::size_t kSpearmanExactMaxN = 10;

namespace detail {
inline double pearson(std::span<const double> a, std::span<const double> b) {
  const auto [ma, ssa] = mean_and_ss(a);
  const auto [mb, ssb] = mean_and_ss(b);
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += (a[i] - ma) * (b[i] - mb);
  return std::clamp(num / std::sqrt(ssa * ssb), -1.0, 1.0);
}
}  // namespace detail

/// Pearson correlation of average ranks. Two-sided p by full permutation
/// enumeration for n <= 10, Student t approximation above.
inline SpearmanResult spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("Spearman needs equal-length samples");
  if (x.size() < 3) throw InvalidArgument("Spearman needs at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto [mx, ssx] = detail::mean_and_ss(rx);
  const auto [my, ssy] = detail::mean_and_ss(ry);
  if (ssx == 0.0 || ssy == 0.0) throw UndefinedMetric("rho undefined under zero variance");

  SpearmanResult out;
  out.rho = detail::pearson(rx, ry);
  out.label = interpret(out.rho, InterpretationTable::Spearman);
  const std::size_t n = x.size();

  if (n <= kSpearmanExactMaxN) {
    // Denominator is permutation invariant; compare centered cross products.
    std::vector<double> cx(n), cy(n);
    for (std::size_t i = 0; i < n; ++i) {
      cx[i] = rx[i] - mx;
      cy[i] = ry[i] - my;
    }
    auto cross = [&](const std::vector<std::size_t>& perm) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += cx[i] * cy[perm[i]];
      return s;
    };
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const double observed = std::abs(cross(perm));
    const double tol = 1e-9 * std::sqrt(ssx * ssy);
    std::uint64_t extreme = 0, total = 0;
    do {
      ++total;
      if (std::abs(cross(perm)) >= observed - tol) ++extreme;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    out.method = PMethod::Exact;
    return out;
  }

  out.method = PMethod::Approximation;
  const double r2 = out.rho * out.rho;
  if (r2 >= 1.0) {
    out.p_value = 0.0;
    return out;
  }
  const double df = static_cast<double>(n - 2);
  const double t = std::abs(out.rho) * std::sqrt(df / (1.0 - r2));
  const boost::math::students_t dist(df);
  out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
  return out;
}

// ---------------------------------------------------------------------------
// Multiple comparisons

struct HolmResult {
  double adjusted_p = 1.0;
  bool reject = false;
};

/// Holm step-down. Results are in input order.
inline std::vector<HolmResult> holm_bonferroni(std::span<const double> p_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must be in (0,1)");
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p-values must be in [0,1]");
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

  std::vector<HolmResult> out(m);
  double running_max = 0.0;
  bool still_rejecting = true;
  for (std::size_t i = 0; i < m; ++i) {
    const double p = p_values[order[i]];
    const double factor = static_cast<double>(m - i);
    running_max = std::max(running_max, std::min(1.0, factor * p));
    still_rejecting = still_rejecting && p <= alpha / factor;
    out[order[i]] = {running_max, still_rejecting};
  }
  return out;
}

/// Symmetric matrix of pairwise p-values, unit diagonal.
struct PairwiseMatrix {
  std::size_t groups = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * groups + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * groups + j]; }
};

/// Dunn's all-pairs test on pooled average ranks with tie correction;
/// two-sided normal p-values, Bonferroni-adjusted by the number of pairs.
inline PairwiseMatrix dunn_all_pairs(const std::vector<std::vector<double>>& groups) {
  const std::size_t k = groups.size();
  if (k < 2) throw InvalidArgument("Dunn's test needs at least 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidArgument("Dunn's test: empty group");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  const auto ranks = average_ranks(pooled);
  const double n = static_cast<double>(pooled.size());

  std::vector<double> mean_rank(k);
  for (std::size_t g = 0, offset = 0; g < k; ++g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < groups[g].size(); ++i) sum += ranks[offset + i];
    mean_rank[g] = sum / static_cast<double>(groups[g].size());
    offset += groups[g].size();
  }

  double tie_sum = 0.0;
  for (std::size_t t : tie_groups(pooled)) {
    const double td = static_cast<double>(t);
    tie_sum += td * td * td - td;
  }
  const double base_var =
      n > 1.0 ? n * (n + 1.0) / 12.0 - tie_sum / (12.0 * (n - 1.0)) : 0.0;
  const double pairs = static_cast<double>(k * (k - 1) / 2);

  PairwiseMatrix m{k, std::vector<double>(k * k, 1.0)};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double diff = mean_rank[i] - mean_rank[j];
      const double var = base_var * (1.0 / static_cast<double>(groups[i].size()) +
                                     1.0 / static_cast<double>(groups[j].size()));
      double p = 1.0;
      if (diff != 0.0 && var > 0.0) p = normal_two_sided_p(diff / std::sqrt(var));
      m(i, j) = m(j, i) = std::min(1.0, p * pairs);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Agreement

struct KappaResult {
  double kappa = 0.0;
  std::string label;
  bool undefined = false;  ///< expected agreement was 1; kappa reported as 1
};

/// Cohen's kappa between two raters over the same items.
template <typename Category>
KappaResult cohens_kappa(std::span<const Category> a, std::span<const Category> b) {
  if (a.size() != b.size()) throw InvalidArgument("kappa needs equal-length ratings");
  if (a.empty()) throw InvalidArgument("kappa needs at least one rating");
  std::map<Category, std::pair<std::uint64_t, std::uint64_t>> marginals;
  std::uint64_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++marginals[a[i]].first;
    ++marginals[b[i]].second;
    if (a[i] == b[i]) ++agree;
  }
  // kappa = (N*agree - sum a_k b_k) / (N^2 - sum a_k b_k), all in integers.
  const std::uint64_t n = a.size();
  std::uint64_t chance = 0;
  for (const auto& [_, m] : marginals) chance += m.first * m.second;

  KappaResult out;
  if (chance == n * n) {
    out.kappa = 1.0;
    out.undefined = true;
  } else {
    const double num = static_cast<double>(n * agree) - static_cast<double>(chance);
    out.kappa = std::min(1.0, num / static_cast<double>(n * n - chance));
  }
  out.label = interpret(out.kappa, InterpretationTable::Kappa);
  return out;
}

template <typename Category>
KappaResult cohens_kappa(const std::vector<Category>& a, const std::vector<Category>& b) {
  return cohens_kappa(std::span<const Category>(a), std::span<const Category>(b));
}

}  // namespace dpeval
