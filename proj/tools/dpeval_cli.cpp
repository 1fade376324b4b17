// dpeval: command-line front end for the evaluation library.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dpeval/dpeval.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dpeval::Error("cannot open '" + path + "'");
  return in;
}

template <typename Fn>
auto with_file(const std::string& path, Fn&& fn) {
  auto in = open_input(path);
  try {
    return fn(in);
  } catch (const dpeval::ParseError& e) {
    throw dpeval::Error(path + ": " + e.what());
  }
}

/// Writes to --out when given, stdout otherwise.
void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw dpeval::Error("cannot write '" + out_path + "'");
  out << text;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + v[i];
  return s;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  std::vector<std::string> files;
  std::vector<int> budgets{10, 20, 30, 40, 50, 60, 70, 80, 90};
  double threshold = 0.5;
  std::string out;
};

void run_metrics(const MetricsArgs& a) {
  dpeval::EvaluationOptions opt;
  opt.threshold = a.threshold;
  opt.budgets = a.budgets;
  std::vector<dpeval::MetricReport> reports;
  for (const auto& path : a.files) {
    const auto set = with_file(path, [&](std::istream& in) {
      return dpeval::parse_predictions(in, fs::path(path).stem().string());
    });
    reports.push_back(dpeval::evaluate(set, opt));
  }
  std::ostringstream os;
  dpeval::emit_report(os, reports, dpeval::evaluation_columns(opt));
  write_output(a.out, os.str());
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  std::string report;
  std::string metric;
  std::string against;
  std::string test;
  double alpha = 0.05;
  std::string out;
};

// NPofB20 -> PofB20, NAveragePofB -> AveragePofB.
std::string default_baseline(const std::string& metric) {
  if (metric.size() > 1 && metric[0] == 'N' && metric.rfind("Norm", 0) != 0)
    return metric.substr(1);
  return {};
}

std::string group_of(const std::string& source) { return source.substr(0, source.find('@')); }

void run_compare(const CompareArgs& a) {
  const auto reports = with_file(a.report, [](std::istream& in) { return dpeval::parse_report(in); });
  if (reports.empty()) throw dpeval::Error(a.report + ": no rows");
  std::ostringstream os;

  const auto ranking = dpeval::rank_classifiers(reports, a.metric);
  os << "rank,source," << a.metric << '\n';
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const auto it = std::find_if(reports.begin(), reports.end(),
                                 [&](const auto& r) { return r.source == ranking[i]; });
    os << i + 1 << ',' << ranking[i] << ',' << dpeval::format_fixed6(*it->get(a.metric)) << '\n';
  }

  std::string test = a.test;
  const std::string against = a.against.empty() ? default_baseline(a.metric) : a.against;
  if (test.empty() && !against.empty() && reports.front().has(against)) test = "wilcoxon";

  if (test == "wilcoxon") {
    if (against.empty()) throw dpeval::InvalidArgument("wilcoxon needs --against");
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> x, y, gains;
    for (const auto& r : reports) {
      const auto v = r.get(a.metric), b = r.get(against);
      if (!v || !b) continue;
      pairs.emplace_back(*v, *b);
      x.push_back(*v);
      y.push_back(*b);
      if (*b > 0.0) gains.push_back(dpeval::relative_gain(*b, *v));
    }
    const auto w = dpeval::wilcoxon_signed_rank(pairs);
    const auto delta = dpeval::cliffs_delta(x, y);
    os << "\ntest,wilcoxon\n"
       << "metric," << a.metric << '\n'
       << "against," << against << '\n'
       << "n_effective," << w.n_effective << '\n'
       << "statistic," << dpeval::format_fixed6(w.statistic) << '\n'
       << "p_value," << dpeval::format_fixed6(w.p_value) << '\n'
       << "method," << dpeval::to_string(w.method) << '\n'
       << "significant," << (w.p_value <= a.alpha ? "yes" : "no") << '\n'
       << "cliffs_delta," << dpeval::format_fixed6(delta.value) << ',' << delta.label << '\n';
    if (!gains.empty()) {
      double mean = 0.0;
      for (double g : gains) mean += g;
      os << "mean_relative_gain," << dpeval::format_fixed6(mean / gains.size()) << '\n';
    }
    const auto base_ranking = dpeval::rank_classifiers(reports, against);
    os << "best_agreement," << (dpeval::best_agreement(ranking, base_ranking) ? "yes" : "no")
       << '\n';
    if (x.size() >= 3) {
      try {
        const auto s = dpeval::spearman_rho(x, y);
        os << "spearman_rho," << dpeval::format_fixed6(s.rho) << ',' << s.label << '\n'
           << "spearman_p," << dpeval::format_fixed6(s.p_value) << ','
           << dpeval::to_string(s.method) << '\n';
      } catch (const dpeval::UndefinedMetric&) {
        os << "spearman_rho,NA\n";
      }
    }
  } else if (test == "dunn") {
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : reports)
      if (const auto v = r.get(a.metric)) groups[group_of(r.source)].push_back(*v);
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    for (auto& [g, v] : groups) {
      names.push_back(g);
      values.push_back(std::move(v));
    }
    const auto m = dpeval::dunn_all_pairs(values);
    os << "\ngroup_a,group_b,adjusted_p,significant\n";
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j)
        os << names[i] << ',' << names[j] << ',' << dpeval::format_fixed6(m(i, j)) << ','
           << (m(i, j) <= a.alpha ? "yes" : "no") << '\n';
  } else if (!test.empty()) {
    throw dpeval::InvalidArgument("unknown test '" + test + "'");
  }
  write_output(a.out, os.str());
}

// ---------------------------------------------------------------------------
// combine

struct CombineArgs {
  std::string entities, commits, touch;
  std::vector<std::string> select;
  std::string out;
};

void run_combine(const CombineArgs& a) {
  const auto set = with_file(a.entities, [&](std::istream& in) {
    return dpeval::parse_predictions(in, fs::path(a.entities).stem().string());
  });
  const auto commits = with_file(a.commits, [](std::istream& in) { return dpeval::parse_commits(in); });
  const auto touch = with_file(a.touch, [](std::istream& in) { return dpeval::parse_touchmap(in); });

  std::optional<dpeval::Selection> selection;
  if (!a.select.empty()) {
    dpeval::Selection s;
    for (const auto& name : a.select) {
      if (name == "direct") s = s | dpeval::ScoreSource::Direct;
      else if (name == "maxc") s = s | dpeval::ScoreSource::MaxC;
      else if (name == "sumc") s = s | dpeval::ScoreSource::SumC;
    }
    selection = s;
  }
  const auto result = dpeval::combine_set(set, commits, touch, selection);

  const bool touched_col = std::any_of(set.records().begin(), set.records().end(),
                                       [](const auto& r) { return r.touched_size.has_value(); });
  std::ostringstream os;
  os << "id,size,probability,actual" << (touched_col ? ",loc_touched" : "") << '\n';
  for (const auto& r : result.set.records()) {
    os << r.id << ',' << r.size << ',' << dpeval::format_exact(r.score) << ','
       << (r.actual ? 1 : 0);
    if (touched_col) os << ',' << r.touched_size.value_or(0);
    os << '\n';
  }
  write_output(a.out, os.str());
  if (result.rescaled)
    std::cerr << "note: combined scores divided by " << result.scale << " to fit [0,1]\n";
}

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  std::string input;
  std::string mode;
  double train_fraction = 0.66;
  std::string release_column = "release";
  std::string out_dir;
};

using Row = std::string;

void write_fold_file(const fs::path& path, const std::string& header,
                     const std::vector<dpeval::Release<Row>>& releases) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dpeval::Error("cannot write '" + path.string() + "'");
  out << header << '\n';
  for (const auto& r : releases)
    for (const auto& line : r.records) out << line << '\n';
}

void run_split(const SplitArgs& a) {
  std::string header;
  std::vector<dpeval::Release<Row>> releases;
  with_file(a.input, [&](std::istream& in) {
    dpeval::csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw dpeval::ParseError(1, 0, "missing header");
    header = join(fields, ',');
    const auto col = std::find(fields.begin(), fields.end(), a.release_column);
    if (col == fields.end())
      throw dpeval::ParseError(reader.line(), 0, "no column '" + a.release_column + "'");
    const auto idx = static_cast<std::size_t>(col - fields.begin());
    const std::size_t width = fields.size();
    std::map<std::string, std::size_t> position;
    while (reader.next(fields)) {
      dpeval::csv::expect_width(fields, width, reader.line());
      const std::string& id = fields[idx];
      auto [it, fresh] = position.emplace(id, releases.size());
      if (fresh)
        releases.push_back({id, static_cast<int>(releases.size()) + 1, {}});
      else if (it->second + 1 != releases.size())
        throw dpeval::ParseError(reader.line(), idx + 1,
                                 "rows of release '" + id + "' are not contiguous");
      releases[it->second].records.push_back(join(fields, ','));
    }
    return 0;
  });

  std::vector<dpeval::Fold<Row>> folds;
  if (a.mode == "walkforward") folds = dpeval::walk_forward(releases);
  else folds.push_back(dpeval::ordered_split(releases, a.train_fraction));

  auto ids = [](const std::vector<dpeval::Release<Row>>& rs) {
    std::vector<std::string> v;
    for (const auto& r : rs) v.push_back(r.release_id);
    return join(v, ';');
  };
  std::cout << "fold,train,test,adjusted\n";
  for (std::size_t i = 0; i < folds.size(); ++i) {
    std::cout << i + 1 << ',' << ids(folds[i].train) << ',' << ids(folds[i].test) << ','
              << (folds[i].boundary_adjusted ? "yes" : "no") << '\n';
    if (!a.out_dir.empty()) {
      fs::create_directories(a.out_dir);
      const std::string stem = "fold" + std::to_string(i + 1);
      write_fold_file(fs::path(a.out_dir) / (stem + "_train.csv"), header, folds[i].train);
      write_fold_file(fs::path(a.out_dir) / (stem + "_test.csv"), header, folds[i].test);
    }
  }
}

// ---------------------------------------------------------------------------
// sastt

struct SasttArgs {
  std::string cases;
  std::vector<std::string> findings;
  std::string profile;
  std::string out;
};

void run_sastt(const SasttArgs& a) {
  const auto suite = with_file(a.cases, [](std::istream& in) { return dpeval::parse_sastt(in); });

  std::vector<std::pair<std::string, std::vector<dpeval::ToolFinding>>> tools;
  if (a.findings.empty()) {
    if (suite.findings.empty())
      throw dpeval::InvalidArgument("no findings: pass --findings or a predicted_cwe column");
    tools.emplace_back(fs::path(a.cases).stem().string(), suite.findings);
  }
  for (const auto& path : a.findings)
    tools.emplace_back(fs::path(path).stem().string(),
                       with_file(path, [](std::istream& in) { return dpeval::parse_findings(in); }));

  std::map<std::string, std::set<int>> expected;
  if (!a.profile.empty())
    for (auto& p : with_file(a.profile, [](std::istream& in) { return dpeval::parse_profiles(in); }))
      expected[p.tool] = std::move(p.expected_cwes);

  std::ostringstream os;
  os << "tool,tp,fp,tn,fn,unknown,precision,recall,f1,npofb20,ecwe,acwe,flags\n";
  std::vector<std::set<int>> acwes;
  for (const auto& [tool, findings] : tools) {
    const auto per = dpeval::per_cwe_confusion(suite.cases, findings);
    dpeval::ConfusionCounts total;
    std::size_t unknown = 0;
    for (const auto& [_, t] : per) {
      total += t.counts;
      unknown += t.unknown;
    }
    const auto cov = dpeval::ecwe_acwe({tool, expected[tool]}, per);
    acwes.push_back(cov.acwe);
    os << tool << ',' << total.tp << ',' << total.fp << ',' << total.tn << ',' << total.fn << ','
       << unknown;
    std::vector<std::string> flags;
    for (auto [name, m] : {std::pair{"precision", dpeval::SastMetric::Precision},
                           std::pair{"recall", dpeval::SastMetric::Recall},
                           std::pair{"f1", dpeval::SastMetric::F1},
                           std::pair{"npofb20", dpeval::SastMetric::NPofB20}}) {
      try {
        const auto v = dpeval::weighted_accuracy(per, m);
        os << ',' << dpeval::format_fixed6(v.value);
        if (v.undefined) flags.push_back(std::string(name) + ":undefined-denominator");
      } catch (const dpeval::Error&) {
        os << ",NA";
        flags.push_back(std::string(name) + ":error");
      }
    }
    os << ',' << cov.ecwe.size() << ',' << cov.acwe.size() << ',' << join(flags, ';') << '\n';
  }

  if (!a.profile.empty()) {
    os << "\nk,max_unique_acwe,method\n";
    for (const auto& s : dpeval::coverage_growth(acwes, acwes.size()))
      os << s.k << ',' << s.max_unique << ',' << (s.greedy ? "greedy" : "exhaustive") << '\n';
  }
  write_output(a.out, os.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Defect prediction evaluation: effort-aware metrics, JIT lifting, SAST scoring "
               "and classifier comparison"};
  app.require_subcommand(1);

  MetricsArgs metrics;
  auto* m = app.add_subcommand("metrics", "Evaluate prediction files into a report CSV");
  m->add_option("files", metrics.files, "Prediction files (id,size,probability,actual)")
      ->required();
  m->add_option("--x", metrics.budgets, "PofB/NPofB budgets in percent")
      ->delimiter(',')
      ->check(CLI::Range(0, 100));
  m->add_option("--threshold", metrics.threshold, "Positive iff probability >= threshold")
      ->check(CLI::Range(0.0, 1.0));
  m->add_option("--out", metrics.out, "Output CSV (default stdout)");

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Rank sources and test metric differences");
  c->add_option("report", compare.report, "Report CSV from 'metrics'")
      ->required();
  c->add_option("--metric", compare.metric, "Metric column")->required();
  c->add_option("--against", compare.against,
                "Baseline column for paired tests (default: metric without leading N)");
  c->add_option("--test", compare.test, "Statistical test")
      ->check(CLI::IsMember({"wilcoxon", "dunn"}));
  c->add_option("--alpha", compare.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  c->add_option("--out", compare.out, "Output file (default stdout)");

  CombineArgs combine;
  auto* j = app.add_subcommand("combine", "Lift commit predictions to entities");
  j->add_option("--entities", combine.entities, "Entity predictions")
      ->required();
  j->add_option("--commits", combine.commits, "Commit predictions (commit_id,probability)")
      ->required();
  j->add_option("--touch", combine.touch, "Touch map (commit_id,entity_id)")
      ->required();
  j->add_option("--select", combine.select, "Scores entering the median")
      ->delimiter(',')
      ->check(CLI::IsMember({"direct", "maxc", "sumc"}));
  j->add_option("--out", combine.out, "Output predictions CSV (default stdout)");

  SplitArgs split;
  auto* s = app.add_subcommand("split", "Order-preserving release splits");
  s->add_option("input", split.input, "CSV with a release column")
      ->required();
  s->add_option("--mode", split.mode, "walkforward or fraction")
      ->required()
      ->check(CLI::IsMember({"walkforward", "fraction"}));
  s->add_option("--train-fraction", split.train_fraction, "Training share for --mode fraction")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--release-column", split.release_column, "Name of the release column");
  s->add_option("--out-dir", split.out_dir, "Write foldN_train.csv / foldN_test.csv here");

  SasttArgs sastt;
  auto* t = app.add_subcommand("sastt", "Score static-analysis tools on a labeled suite");
  t->add_option("--cases", sastt.cases, "Test cases (case_id,cwe_id,polarity[,predicted_cwe])")
      ->required();
  t->add_option("--findings", sastt.findings, "Tool findings (case_id,predicted_cwe), one per tool");
  t->add_option("--profile", sastt.profile, "Documented CWEs (tool,cwe_id)");
  t->add_option("--out", sastt.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*m) run_metrics(metrics);
    else if (*c) run_compare(compare);
    else if (*j) run_combine(combine);
    else if (*s) run_split(split);
    else if (*t) run_sastt(sastt);
  } catch (const dpeval::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
