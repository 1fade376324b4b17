#pragma once

// Domain types shared by every metric: predicted entities, prediction sets,
// deterministic rankings and LOC inspection budgets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dpeval/error.hpp"

namespace dpeval {

/// One predicted entity (file, class, method or commit).
struct EntityPrediction {
  std::string id;
  std::uint64_t size = 1;  ///< LOC, >= 1
  double score = 0.0;      ///< predicted defectiveness probability in [0,1]
  bool actual = false;     ///< ground truth
  std::optional<std::uint64_t> touched_size;  ///< LOC touched in the release
};

inline void validate(const EntityPrediction& e) {
  if (e.size < 1) throw InvalidArgument("entity '" + e.id + "': size must be >= 1");
  if (!(e.score >= 0.0 && e.score <= 1.0))
    throw InvalidArgument("entity '" + e.id + "': score must be in [0,1]");
}

/// Predictions of one classifier on one dataset. Immutable once built.
class PredictionSet {
 public:
  PredictionSet(std::string name, std::vector<EntityPrediction> records)
      : name_(std::move(name)), records_(std::move(records)) {
    if (records_.empty()) throw InvalidArgument("prediction set '" + name_ + "' is empty");
    std::unordered_set<std::string> seen;
    seen.reserve(records_.size());
    for (const auto& r : records_) {
      validate(r);
      if (!seen.insert(r.id).second)
        throw InvalidArgument("prediction set '" + name_ + "': duplicate id '" + r.id + "'");
      total_loc_ += r.size;
      if (r.actual) ++defective_count_;
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<EntityPrediction>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::uint64_t total_loc() const noexcept { return total_loc_; }
  std::size_t defective_count() const noexcept { return defective_count_; }

 private:
  std::string name_;
  std::vector<EntityPrediction> records_;
  std::uint64_t total_loc_ = 0;
  std::size_t defective_count_ = 0;
};

enum class RankingPolicy {
  ScoreDescending,         ///< predicted probability
  ScoreDensityDescending,  ///< predicted probability / size
  ActualDensityDescending  ///< actual / size; the optimal ranking for Popt
};

/// An ordering of a prediction set with running LOC and defect totals.
struct Ranking {
  std::vector<std::size_t> indices;  ///< positions in PredictionSet::records()
  std::vector<std::string> ids;
  std::vector<std::uint64_t> cumulative_loc;
  std::vector<std::size_t> cumulative_defectives;
  std::uint64_t total_loc = 0;
  std::size_t total_defectives = 0;

  std::size_t size() const noexcept { return ids.size(); }
};

namespace detail {

// Exact comparison of a/sa against b/sb via a*sb vs b*sa. The two-product
// (p, e) with p + e == a*sb holds exactly, so comparing p first and then the
// rounding error e is exact for finite inputs.
inline int compare_density(double a, std::uint64_t sa, double b, std::uint64_t sb) {
  if (sa == sb) return a < b ? -1 : (a > b ? 1 : 0);
  const double fsa = static_cast<double>(sa);
  const double fsb = static_cast<double>(sb);
  const double p1 = a * fsb;
  const double e1 = std::fma(a, fsb, -p1);
  const double p2 = b * fsa;
  const double e2 = std::fma(b, fsa, -p2);
  if (p1 != p2) return p1 < p2 ? -1 : 1;
  if (e1 != e2) return e1 < e2 ? -1 : 1;
  return 0;
}

inline int compare_key(const EntityPrediction& a, const EntityPrediction& b,
                       RankingPolicy policy) {
  switch (policy) {
    case RankingPolicy::ScoreDescending:
      return a.score < b.score ? -1 : (a.score > b.score ? 1 : 0);
    case RankingPolicy::ScoreDensityDescending:
      return compare_density(a.score, a.size, b.score, b.size);
    case RankingPolicy::ActualDensityDescending:
      return compare_density(a.actual ? 1.0 : 0.0, a.size, b.actual ? 1.0 : 0.0, b.size);
  }
  return 0;
}

}  // namespace detail

/// Orders the set by descending policy key; ties go to the smaller id.
inline Ranking rank(const PredictionSet& set, RankingPolicy policy) {
  const auto& recs = set.records();
  Ranking r;
  r.indices.resize(recs.size());
  std::iota(r.indices.begin(), r.indices.end(), std::size_t{0});
  std::sort(r.indices.begin(), r.indices.end(), [&](std::size_t i, std::size_t j) {
    const int c = detail::compare_key(recs[i], recs[j], policy);
    if (c != 0) return c > 0;
    return recs[i].id < recs[j].id;
  });

  r.ids.reserve(recs.size());
  r.cumulative_loc.reserve(recs.size());
  r.cumulative_defectives.reserve(recs.size());
  std::uint64_t loc = 0;
  std::size_t defects = 0;
  for (std::size_t i : r.indices) {
    loc += recs[i].size;
    if (recs[i].actual) ++defects;
    r.ids.push_back(recs[i].id);
    r.cumulative_loc.push_back(loc);
    r.cumulative_defectives.push_back(defects);
  }
  r.total_loc = loc;
  r.total_defectives = defects;
  return r;
}

inline constexpr double kBudgetSlack = 1e-9;

inline void check_percentage(double x) {
  if (!(x >= 0.0 && x <= 100.0))
    throw InvalidArgument("inspection percentage must be in [0,100]");
}

/// Number of leading entities whose cumulative LOC fits in x% of the total.
/// The entity that would cross the budget is not inspected.
inline std::size_t inspection_prefix_length(const Ranking& ranking, double x) {
  check_percentage(x);
  const double budget =
      x / 100.0 * static_cast<double>(ranking.total_loc) * (1.0 + kBudgetSlack);
  const auto it = std::upper_bound(
      ranking.cumulative_loc.begin(), ranking.cumulative_loc.end(), budget,
      [](double b, std::uint64_t loc) { return b < static_cast<double>(loc); });
  return static_cast<std::size_t>(it - ranking.cumulative_loc.begin());
}

/// Ids inspected within x% of the total LOC, in ranking order.
inline std::vector<std::string> inspection_prefix(const Ranking& ranking, double x) {
  const std::size_t k = inspection_prefix_length(ranking, x);
  return {ranking.ids.begin(), ranking.ids.begin() + static_cast<std::ptrdiff_t>(k)};
}

}  // namespace dpeval
