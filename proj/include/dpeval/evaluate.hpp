#pragma once

// The standard per-file evaluation: every classification and effort-aware
// metric for one prediction set, collected into a MetricReport row.

#include <functional>
#include <string>
#include <vector>

#include "dpeval/classification.hpp"
#include "dpeval/core.hpp"
#include "dpeval/effort.hpp"
#include "dpeval/io.hpp"

namespace dpeval {

struct EvaluationOptions {
  double threshold = 0.5;
  /// PofB/NPofB budgets reported individually. 0 and 100 are omitted by
  /// default since they are always 0 and 1.
  std::vector<int> budgets{10, 20, 30, 40, 50, 60, 70, 80, 90};
};

/// Metric columns in report order for the given options.
inline std::vector<std::string> evaluation_columns(const EvaluationOptions& opt = {}) {
  std::vector<std::string> cols{"Precision", "Recall", "F1", "MCC", "Gmeasure", "AUC"};
  for (int x : opt.budgets) cols.push_back("PofB" + std::to_string(x));
  for (int x : opt.budgets) cols.push_back("NPofB" + std::to_string(x));
  for (const char* c : {"AveragePofB", "NAveragePofB", "Popt", "Norm(Popt)", "Peffort", "IFA",
                        "PCI@20"})
    cols.emplace_back(c);
  return cols;
}

inline MetricReport evaluate(const PredictionSet& set, const EvaluationOptions& opt = {}) {
  MetricReport rep;
  rep.source = set.name();

  auto put = [&](const std::string& name, const std::function<double()>& fn) {
    try {
      rep.set(name, fn());
    } catch (const Error&) {
      rep.set(name, std::nullopt);
    }
  };
  auto put_flagged = [&](const std::string& name, MetricValue v) {
    rep.set(name, v.value);
    if (v.undefined) rep.flags.push_back(name + ":undefined-denominator");
  };

  const ConfusionCounts c = confusion_at_threshold(set, opt.threshold);
  put_flagged("Precision", precision(c));
  put_flagged("Recall", recall(c));
  put_flagged("F1", f1(c));
  put_flagged("MCC", mcc(c));
  put_flagged("Gmeasure", gmeasure(c));
  put("AUC", [&] { return auc(set); });
  for (int x : opt.budgets) put("PofB" + std::to_string(x), [&] { return pofb(set, x); });
  for (int x : opt.budgets) put("NPofB" + std::to_string(x), [&] { return npofb(set, x); });
  put("AveragePofB", [&] { return average_pofb(set); });
  put("NAveragePofB", [&] { return average_npofb(set); });
  put("Popt", [&] { return popt(set); });
  put("Norm(Popt)", [&] { return norm_popt(set); });
  put("Peffort", [&] { return peffort(set); });
  put("IFA", [&] { return static_cast<double>(ifa(set)); });
  put("PCI@20", [&] { return proportion_inspected(set, 20.0); });
  return rep;
}

}  // namespace dpeval
