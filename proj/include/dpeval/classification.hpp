#pragma once

// Threshold-dependent confusion metrics and rank-based AUC.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "dpeval/core.hpp"
#include "dpeval/error.hpp"

namespace dpeval {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A metric value. When a denominator is zero the value is 0 and `undefined`
/// is set, so aggregates never see NaN.
struct MetricValue {
  double value = 0.0;
  bool undefined = false;
};

/// An entity is predicted positive iff score >= threshold.
inline ConfusionCounts confusion_at_threshold(const PredictionSet& set, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw InvalidArgument("threshold must be in [0,1]");
  ConfusionCounts c;
  for (const auto& r : set.records()) {
    const bool predicted = r.score >= threshold;
    if (r.actual)
      ++(predicted ? c.tp : c.fn);
    else
      ++(predicted ? c.fp : c.tn);
  }
  return c;
}

namespace detail {
inline MetricValue ratio(double num, double den) {
  if (den == 0.0) return {0.0, true};
  return {num / den, false};
}
}  // namespace detail

inline MetricValue precision(const ConfusionCounts& c) {
  return detail::ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
}

inline MetricValue recall(const ConfusionCounts& c) {
  return detail::ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
}

inline MetricValue f1(const ConfusionCounts& c) {
  const auto p = precision(c);
  const auto r = recall(c);
  auto out = detail::ratio(2.0 * p.value * r.value, p.value + r.value);
  out.undefined = out.undefined || p.undefined || r.undefined;
  return out;
}

/// Matthews correlation coefficient.
inline MetricValue mcc(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) return {0.0, true};
  const double v = (tp * tn - fp * fn) / std::sqrt(den);
  return {std::clamp(v, -1.0, 1.0), false};
}

/// Harmonic mean of recall and 1 - pf, where pf = FP / (FP + TN).
inline MetricValue gmeasure(const ConfusionCounts& c) {
  const auto r = recall(c);
  const auto pf = detail::ratio(static_cast<double>(c.fp), static_cast<double>(c.fp + c.tn));
  const double specificity = 1.0 - pf.value;
  auto out = detail::ratio(2.0 * r.value * specificity, r.value + specificity);
  out.undefined = out.undefined || r.undefined || pf.undefined;
  return out;
}

/// Actual-positive prevalence (TP + FN) / total.
inline double inspection_ratio(const ConfusionCounts& c) {
  if (c.total() == 0) throw InvalidArgument("inspection ratio of empty confusion counts");
  return static_cast<double>(c.tp + c.fn) / static_cast<double>(c.total());
}

/// Mann-Whitney AUC: P(random positive outscores random negative), ties 1/2.
inline double auc(const PredictionSet& set) {
  const auto& recs = set.records();
  const std::size_t n = recs.size();
  const std::size_t n_pos = set.defective_count();
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetric("AUC undefined for single-class data");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return recs[a].score < recs[b].score; });

  // Sum of doubled average ranks of positives, kept integral.
  std::uint64_t pos_rank_sum_x2 = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < n && recs[order[j]].score == recs[order[i]].score) {
      if (recs[order[j]].actual) ++pos_in_group;
      ++j;
    }
    // Ranks i+1 .. j; doubled average = i + 1 + j.
    pos_rank_sum_x2 += pos_in_group * static_cast<std::uint64_t>(i + 1 + j);
    i = j;
  }
  const std::uint64_t u_x2 = pos_rank_sum_x2 - static_cast<std::uint64_t>(n_pos) * (n_pos + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Sum(w_i * v_i) / Sum(w_i).
inline double stratified_weighted_average(std::span<const double> values,
                                          std::span<const double> weights) {
  if (values.size() != weights.size())
    throw InvalidArgument("values and weights differ in length");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] < 0.0) throw InvalidArgument("weights must be non-negative");
    num += weights[i] * values[i];
    den += weights[i];
  }
  if (den <= 0.0) throw InvalidArgument("weighted average with zero total weight");
  return num / den;
}

}  // namespace dpeval
