#pragma once

// Effort-aware metrics. Effort is LOC; every defective entity carries one unit
// of defect mass. Curves credit an entity's defect linearly across its LOC.

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "dpeval/core.hpp"
#include "dpeval/error.hpp"

namespace dpeval {

/// Cumulative defect fraction versus cumulative LOC fraction, piecewise linear
/// between consecutive points.
struct EffortCurve {
  struct Point {
    double effort;   ///< cumulative LOC fraction
    double defects;  ///< cumulative defective-entity fraction
  };
  std::vector<Point> points;

  /// Trapezoidal area over [0, limit].
  double area(double limit = 1.0) const {
    double a = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      const auto& p = points[i - 1];
      const auto& q = points[i];
      if (p.effort >= limit) break;
      if (q.effort <= limit) {
        a += (q.effort - p.effort) * (p.defects + q.defects) / 2.0;
      } else {
        const double t = (limit - p.effort) / (q.effort - p.effort);
        const double y = p.defects + t * (q.defects - p.defects);
        a += (limit - p.effort) * (p.defects + y) / 2.0;
      }
    }
    return a;
  }
};

namespace detail {
inline void require_defectives(const PredictionSet& set, const char* metric) {
  if (set.defective_count() == 0)
    throw UndefinedMetric(std::string(metric) + " undefined: zero defectives");
}

inline double found_fraction(const PredictionSet& set, RankingPolicy policy, double x) {
  const Ranking r = rank(set, policy);
  const std::size_t k = inspection_prefix_length(r, x);
  const std::size_t found = k == 0 ? 0 : r.cumulative_defectives[k - 1];
  return static_cast<double>(found) / static_cast<double>(r.total_defectives);
}

inline double grid_average(const PredictionSet& set, RankingPolicy policy) {
  double sum = 0.0;
  for (int x = 0; x <= 100; x += 10) sum += found_fraction(set, policy, x);
  return sum / 11.0;
}
}  // namespace detail

inline EffortCurve effort_curve(const PredictionSet& set, RankingPolicy policy) {
  const Ranking r = rank(set, policy);
  const double total_loc = static_cast<double>(r.total_loc);
  const double total_def = static_cast<double>(std::max<std::size_t>(r.total_defectives, 1));
  EffortCurve c;
  c.points.reserve(r.size() + 1);
  c.points.push_back({0.0, 0.0});
  for (std::size_t i = 0; i < r.size(); ++i) {
    c.points.push_back({static_cast<double>(r.cumulative_loc[i]) / total_loc,
                        static_cast<double>(r.cumulative_defectives[i]) / total_def});
  }
  return c;
}

/// Fraction of defective entities found in the first x% of LOC, ranked by
/// predicted probability.
inline double pofb(const PredictionSet& set, double x) {
  detail::require_defectives(set, "PofB");
  return detail::found_fraction(set, RankingPolicy::ScoreDescending, x);
}

/// PofB with entities ranked by predicted defect density (probability / LOC).
inline double npofb(const PredictionSet& set, double x) {
  detail::require_defectives(set, "NPofB");
  return detail::found_fraction(set, RankingPolicy::ScoreDensityDescending, x);
}

/// Mean of PofB over x = 0, 10, ..., 100.
inline double average_pofb(const PredictionSet& set) {
  detail::require_defectives(set, "AveragePofB");
  return detail::grid_average(set, RankingPolicy::ScoreDescending);
}

inline double average_npofb(const PredictionSet& set) {
  detail::require_defectives(set, "NAveragePofB");
  return detail::grid_average(set, RankingPolicy::ScoreDensityDescending);
}

/// 1 - (area under the optimal curve - area under the predicted curve).
inline double popt(const PredictionSet& set) {
  detail::require_defectives(set, "Popt");
  const double optimal = effort_curve(set, RankingPolicy::ActualDensityDescending).area();
  const double predicted = effort_curve(set, RankingPolicy::ScoreDensityDescending).area();
  return 1.0 - (optimal - predicted);
}

/// Popt restricted to the first 20% of LOC, areas divided by the 0.2 window.
inline double norm_popt(const PredictionSet& set) {
  detail::require_defectives(set, "Norm(Popt)");
  constexpr double kWindow = 0.2;
  const double optimal = effort_curve(set, RankingPolicy::ActualDensityDescending).area(kWindow);
  const double predicted = effort_curve(set, RankingPolicy::ScoreDensityDescending).area(kWindow);
  return 1.0 - (optimal - predicted) / kWindow;
}

/// Clean entities ranked before the first defective one.
inline std::size_t ifa(const PredictionSet& set) {
  detail::require_defectives(set, "IFA");
  const Ranking r = rank(set, RankingPolicy::ScoreDescending);
  const auto first =
      std::find_if(r.cumulative_defectives.begin(), r.cumulative_defectives.end(),
                   [](std::size_t d) { return d > 0; });
  return static_cast<std::size_t>(first - r.cumulative_defectives.begin());
}

/// Share of entities inspected in the first x% of LOC (PCI@x, PMI@x, PFI@x).
inline double proportion_inspected(const PredictionSet& set, double x) {
  const Ranking r = rank(set, RankingPolicy::ScoreDescending);
  return static_cast<double>(inspection_prefix_length(r, x)) / static_cast<double>(r.size());
}

/// Raw area under the predicted-density effort curve.
// NOTE: no closed formula is published for Peffort; this is the area reading.
inline double peffort(const PredictionSet& set) {
  detail::require_defectives(set, "Peffort");
  return effort_curve(set, RankingPolicy::ScoreDensityDescending).area();
}

/// (normalized - base) / base.
inline double relative_gain(double base, double normalized) {
  if (base == 0.0) throw UndefinedMetric("gain undefined: zero base");
  if (base < 0.0) throw InvalidArgument("gain base must be positive");
  return (normalized - base) / base;
}

}  // namespace dpeval
