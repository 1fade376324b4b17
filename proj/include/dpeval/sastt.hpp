#pragma once

// Scoring static application security testing tools (SASTTs) on a labeled
// test suite. Every case is a good or bad variant of one CWE; a tool finding
// counts only when it names exactly that CWE.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpeval/classification.hpp"
#include "dpeval/core.hpp"
#include "dpeval/effort.hpp"
#include "dpeval/error.hpp"

namespace dpeval {

enum class Polarity { Bad, Good };

struct SastTestCase {
  std::string case_id;  ///< file$method
  int cwe_id = 0;
  Polarity polarity = Polarity::Bad;
};

/// What the tool reported for a case: nothing, a CWE, or an unmappable "?".
struct CwePrediction {
  enum class Kind { None, Cwe, Unknown };
  Kind kind = Kind::None;
  int cwe = 0;

  static CwePrediction none() { return {}; }
  static CwePrediction unknown() { return {Kind::Unknown, 0}; }
  static CwePrediction of(int cwe) { return {Kind::Cwe, cwe}; }
};

struct ToolFinding {
  std::string case_id;
  CwePrediction predicted;
};

struct ToolProfile {
  std::string tool;
  std::set<int> expected_cwes;
};

enum class Outcome { TP, FP, TN, FN, Unknown };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::TP: return "TP";
    case Outcome::FP: return "FP";
    case Outcome::TN: return "TN";
    case Outcome::FN: return "FN";
    case Outcome::Unknown: return "?";
  }
  return "";
}

/// Confusion matrix value of one case. A finding naming another CWE is
/// treated like no finding.
inline Outcome classify_outcome(const SastTestCase& c, const ToolFinding& f) {
  if (f.case_id != c.case_id)
    throw InvalidArgument("finding for '" + f.case_id + "' applied to case '" + c.case_id + "'");
  if (f.predicted.kind == CwePrediction::Kind::Unknown) return Outcome::Unknown;
  const bool hit = f.predicted.kind == CwePrediction::Kind::Cwe && f.predicted.cwe == c.cwe_id;
  if (c.polarity == Polarity::Bad) return hit ? Outcome::TP : Outcome::FN;
  return hit ? Outcome::FP : Outcome::TN;
}

struct CaseOutcome {
  std::string case_id;
  Outcome outcome;
};

struct CweTally {
  ConfusionCounts counts;
  std::size_t unknown = 0;
  std::vector<CaseOutcome> cases;  ///< sorted by case id

  std::size_t classified() const { return static_cast<std::size_t>(counts.total()); }
};

using PerCweConfusion = std::map<int, CweTally>;

/// Tallies outcomes per CWE. Cases without a finding count as silent. When a
/// case has several findings, a matching CWE wins over "?", and "?" wins over
/// a mismatch.
inline PerCweConfusion per_cwe_confusion(const std::vector<SastTestCase>& cases,
                                         const std::vector<ToolFinding>& findings) {
  std::unordered_map<std::string, const SastTestCase*> by_id;
  for (const auto& c : cases) {
    if (c.cwe_id <= 0) throw InvalidArgument("case '" + c.case_id + "': cwe_id must be > 0");
    if (!by_id.emplace(c.case_id, &c).second)
      throw InvalidArgument("duplicate case id '" + c.case_id + "'");
  }

  std::unordered_map<std::string, ToolFinding> merged;
  for (const auto& f : findings) {
    const auto it = by_id.find(f.case_id);
    if (it == by_id.end()) throw InvalidArgument("finding references unknown case '" + f.case_id + "'");
    auto [slot, inserted] = merged.emplace(f.case_id, f);
    if (inserted) continue;
    const int cwe = it->second->cwe_id;
    auto strength = [cwe](const CwePrediction& p) {
      if (p.kind == CwePrediction::Kind::Cwe && p.cwe == cwe) return 2;
      return p.kind == CwePrediction::Kind::Unknown ? 1 : 0;
    };
    if (strength(f.predicted) > strength(slot->second.predicted)) slot->second = f;
  }

  PerCweConfusion out;
  for (const auto& c : cases) {
    const auto it = merged.find(c.case_id);
    const ToolFinding f = it == merged.end() ? ToolFinding{c.case_id, CwePrediction::none()}
                                             : it->second;
    const Outcome o = classify_outcome(c, f);
    auto& t = out[c.cwe_id];
    switch (o) {
      case Outcome::TP: ++t.counts.tp; break;
      case Outcome::FP: ++t.counts.fp; break;
      case Outcome::TN: ++t.counts.tn; break;
      case Outcome::FN: ++t.counts.fn; break;
      case Outcome::Unknown: ++t.unknown; break;
    }
    t.cases.push_back({c.case_id, o});
  }
  for (auto& [_, t] : out)
    std::sort(t.cases.begin(), t.cases.end(),
              [](const CaseOutcome& a, const CaseOutcome& b) { return a.case_id < b.case_id; });
  return out;
}

struct CweCoverage {
  std::set<int> ecwe;        ///< claimed by the documentation
  std::set<int> acwe;        ///< claimed and hit by at least one TP
  std::set<int> not_actual;  ///< ecwe \ acwe
};

inline CweCoverage ecwe_acwe(const ToolProfile& profile, const PerCweConfusion& per_cwe) {
  CweCoverage out;
  out.ecwe = profile.expected_cwes;
  for (int c : out.ecwe) {
    const auto it = per_cwe.find(c);
    if (it != per_cwe.end() && it->second.counts.tp >= 1)
      out.acwe.insert(c);
    else
      out.not_actual.insert(c);
  }
  return out;
}

enum class SastMetric { Precision, Recall, F1, NPofB20 };

/// NPofB20 over one CWE's classified cases. Cases flagged with the right CWE
/// score 1, others 0; every case weighs one LOC; ties go by case id.
inline MetricValue cwe_npofb20(const CweTally& tally) {
  std::vector<EntityPrediction> recs;
  bool any_bad = false;
  for (const auto& c : tally.cases) {
    if (c.outcome == Outcome::Unknown) continue;
    const bool flagged = c.outcome == Outcome::TP || c.outcome == Outcome::FP;
    const bool bad = c.outcome == Outcome::TP || c.outcome == Outcome::FN;
    any_bad = any_bad || bad;
    recs.push_back({c.case_id, 1, flagged ? 1.0 : 0.0, bad, std::nullopt});
  }
  if (!any_bad) return {0.0, true};
  return {npofb(PredictionSet("cwe", std::move(recs)), 20.0), false};
}

inline MetricValue cwe_metric(const CweTally& tally, SastMetric metric) {
  switch (metric) {
    case SastMetric::Precision: return precision(tally.counts);
    case SastMetric::Recall: return recall(tally.counts);
    case SastMetric::F1: return f1(tally.counts);
    case SastMetric::NPofB20: return cwe_npofb20(tally);
  }
  return {};
}

/// Per-CWE metric averaged with weights equal to each CWE's classified case
/// count ("?" cases excluded). Flagged when any stratum was undefined.
inline MetricValue weighted_accuracy(const PerCweConfusion& per_cwe, SastMetric metric) {
  std::vector<double> values, weights;
  bool undefined = false;
  for (const auto& [_, t] : per_cwe) {
    if (t.classified() == 0) continue;
    const auto v = cwe_metric(t, metric);
    undefined = undefined || v.undefined;
    values.push_back(v.value);
    weights.push_back(static_cast<double>(t.classified()));
  }
  if (values.empty()) throw InvalidArgument("weighted accuracy over no classified cases");
  return {stratified_weighted_average(values, weights), undefined};
}

struct CoverageStep {
  std::size_t k = 0;
  std::size_t max_unique = 0;
  bool greedy = false;  ///< lower bound from greedy selection, not exhaustive
};

inline constexpr std::size_t kCoverageExhaustiveMaxTools = 20;

/// For k = 1..k_max, the most distinct CWEs covered by any k tools.
inline std::vector<CoverageStep> coverage_growth(const std::vector<std::set<int>>& tool_cwes,
                                                 std::size_t k_max) {
  const std::size_t n = tool_cwes.size();
  if (k_max > n) throw InvalidArgument("k_max exceeds the number of tools");
  std::vector<CoverageStep> out;
  if (k_max == 0) return out;

  if (n <= kCoverageExhaustiveMaxTools) {
    std::vector<std::size_t> best(n + 1, 0);
    std::set<int> u;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      const auto k = static_cast<std::size_t>(std::popcount(mask));
      if (k > k_max) continue;
      u.clear();
      for (std::size_t t = 0; t < n; ++t)
        if (mask & (1u << t)) u.insert(tool_cwes[t].begin(), tool_cwes[t].end());
      best[k] = std::max(best[k], u.size());
    }
    for (std::size_t k = 1; k <= k_max; ++k) out.push_back({k, best[k], false});
    return out;
  }

  std::set<int> covered;
  std::vector<bool> used(n, false);
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::size_t pick = n, gain_best = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (used[t]) continue;
      std::size_t gain = 0;
      for (int c : tool_cwes[t]) gain += !covered.count(c);
      if (pick == n || gain > gain_best) {
        pick = t;
        gain_best = gain;
      }
    }
    used[pick] = true;
    covered.insert(tool_cwes[pick].begin(), tool_cwes[pick].end());
    out.push_back({k, covered.size(), true});
  }
  return out;
}

}  // namespace dpeval
