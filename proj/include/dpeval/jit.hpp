#pragma once

// Lifting commit-level (just-in-time) defect predictions to entity level.
// MaxC and SumC aggregate the scores of the commits touching an entity; the
// combined score is the median of the entity's own score and those two.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dpeval/core.hpp"
#include "dpeval/error.hpp"

namespace dpeval {

struct CommitPrediction {
  std::string commit_id;
  double score = 0.0;
};

/// Commit -> entities it touched.
struct TouchMap {
  std::map<std::string, std::set<std::string>> edges;

  void add(const std::string& commit_id, const std::string& entity_id) {
    edges[commit_id].insert(entity_id);
  }
};

/// Which scores enter the median.
enum class ScoreSource : unsigned { Direct = 1u, MaxC = 2u, SumC = 4u };

class Selection {
 public:
  constexpr Selection() = default;
  constexpr Selection(std::initializer_list<ScoreSource> sources) {
    for (auto s : sources) bits_ |= static_cast<unsigned>(s);
  }
  static constexpr Selection all() {
    return {ScoreSource::Direct, ScoreSource::MaxC, ScoreSource::SumC};
  }

  constexpr Selection operator|(ScoreSource s) const {
    Selection out = *this;
    out.bits_ |= static_cast<unsigned>(s);
    return out;
  }
  constexpr bool contains(ScoreSource s) const { return bits_ & static_cast<unsigned>(s); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool operator==(const Selection&) const = default;

 private:
  unsigned bits_ = 0;
};

struct CombinedScore {
  std::string entity_id;
  double direct = 0.0;
  std::optional<double> maxc;
  std::optional<double> sumc;
  double combined = 0.0;
};

/// Entity-level view of commits: for each entity, the scores of the commits
/// that touched it, sorted so that aggregation does not depend on input order.
class CommitIndex {
 public:
  CommitIndex(const std::vector<CommitPrediction>& commits, const TouchMap& touch) {
    std::unordered_map<std::string, double> score_of;
    for (const auto& c : commits) {
      if (!(c.score >= 0.0 && c.score <= 1.0))
        throw InvalidArgument("commit '" + c.commit_id + "': score must be in [0,1]");
      if (!score_of.emplace(c.commit_id, c.score).second)
        throw InvalidArgument("duplicate commit id '" + c.commit_id + "'");
    }
    std::string dangling;
    for (const auto& [commit, entities] : touch.edges) {
      const auto it = score_of.find(commit);
      if (it == score_of.end()) {
        dangling += (dangling.empty() ? "" : ", ") + commit;
        continue;
      }
      for (const auto& e : entities) scores_[e].push_back(it->second);
    }
    if (!dangling.empty())
      throw InvalidArgument("touch map references unknown commits: " + dangling);
    for (auto& [_, v] : scores_) std::sort(v.begin(), v.end());
  }

  const std::vector<double>* scores(const std::string& entity_id) const {
    const auto it = scores_.find(entity_id);
    return it == scores_.end() ? nullptr : &it->second;
  }

  std::vector<std::string> entity_ids() const {
    std::vector<std::string> ids;
    ids.reserve(scores_.size());
    for (const auto& [id, _] : scores_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

 private:
  std::unordered_map<std::string, std::vector<double>> scores_;
};

inline std::optional<double> maxc(const std::string& entity_id, const CommitIndex& index) {
  const auto* s = index.scores(entity_id);
  if (!s || s->empty()) return std::nullopt;
  return s->back();
}

inline std::optional<double> sumc(const std::string& entity_id, const CommitIndex& index) {
  const auto* s = index.scores(entity_id);
  if (!s || s->empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : *s) sum += v;
  return sum;
}

inline std::optional<double> maxc(const std::string& entity_id,
                                  const std::vector<CommitPrediction>& commits,
                                  const TouchMap& touch) {
  return maxc(entity_id, CommitIndex(commits, touch));
}

inline std::optional<double> sumc(const std::string& entity_id,
                                  const std::vector<CommitPrediction>& commits,
                                  const TouchMap& touch) {
  return sumc(entity_id, CommitIndex(commits, touch));
}

/// Median of the selected scores; an even count averages the middle two.
inline double combine(double direct, std::optional<double> max_c, std::optional<double> sum_c,
                      Selection selection) {
  if (selection.empty()) throw InvalidArgument("empty score selection");
  std::vector<double> v;
  v.reserve(3);
  if (selection.contains(ScoreSource::Direct)) v.push_back(direct);
  if (selection.contains(ScoreSource::MaxC)) {
    if (!max_c) throw InvalidArgument("MaxC selected but absent");
    v.push_back(*max_c);
  }
  if (selection.contains(ScoreSource::SumC)) {
    if (!sum_c) throw InvalidArgument("SumC selected but absent");
    v.push_back(*sum_c);
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  // Midpoint written so the result stays within [lo, hi] under rounding.
  const double lo = v[n / 2 - 1], hi = v[n / 2];
  return std::clamp(lo + (hi - lo) / 2.0, lo, hi);
}

/// Median over every present input; untouched entities keep their own score.
inline double combine(double direct, std::optional<double> max_c, std::optional<double> sum_c) {
  Selection s{ScoreSource::Direct};
  if (max_c) s = s | ScoreSource::MaxC;
  if (sum_c) s = s | ScoreSource::SumC;
  return combine(direct, max_c, sum_c, s);
}

struct CombineResult {
  PredictionSet set;
  std::vector<CombinedScore> scores;  ///< same order as set.records()
  bool rescaled = false;
  double scale = 1.0;  ///< combined scores were divided by this
};

/// Replaces each entity's score with its combined score. Untouched entities
/// keep the direct score regardless of `selection`. When any combined score
/// exceeds 1, all are divided by the smallest power of two that brings the
/// maximum into [0,1]; power-of-two division is exact, so ranks are kept.
inline CombineResult combine_set(const PredictionSet& entities,
                                 const std::vector<CommitPrediction>& commits,
                                 const TouchMap& touch,
                                 std::optional<Selection> selection = std::nullopt) {
  const CommitIndex index(commits, touch);

  std::unordered_set<std::string> known;
  for (const auto& r : entities.records()) known.insert(r.id);
  std::string unknown;
  for (const auto& id : index.entity_ids())
    if (!known.count(id)) unknown += (unknown.empty() ? "" : ", ") + id;
  if (!unknown.empty())
    throw InvalidArgument("touch map references unknown entities: " + unknown);

  std::vector<CombinedScore> scores;
  scores.reserve(entities.size());
  double max_combined = 0.0;
  for (const auto& r : entities.records()) {
    CombinedScore cs{r.id, r.score, maxc(r.id, index), sumc(r.id, index), r.score};
    if (cs.maxc || cs.sumc)
      cs.combined = selection ? combine(cs.direct, cs.maxc, cs.sumc, *selection)
                              : combine(cs.direct, cs.maxc, cs.sumc);
    max_combined = std::max(max_combined, cs.combined);
    scores.push_back(std::move(cs));
  }

  double scale = 1.0;
  while (max_combined / scale > 1.0) scale *= 2.0;

  std::vector<EntityPrediction> out = entities.records();
  for (std::size_t i = 0; i < out.size(); ++i) out[i].score = scores[i].combined / scale;
  return {PredictionSet(entities.name(), std::move(out)), std::move(scores), scale != 1.0,
          scale};
}

}  // namespace dpeval
