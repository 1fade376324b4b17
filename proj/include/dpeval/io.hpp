#pragma once

// CSV ingestion, dataset splitting and report emission.
//
// All inputs are UTF-8, comma separated, unquoted, LF or CRLF terminated.
// Blank lines are ignored.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dpeval/core.hpp"
#include "dpeval/error.hpp"
#include "dpeval/jit.hpp"
#include "dpeval/sastt.hpp"

namespace dpeval {

namespace csv {

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

/// Line-oriented reader that tracks 1-based line numbers.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next non-blank line split into fields; false at end of input.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = split(line);
      return true;
    }
    return false;
  }

  std::size_t line() const noexcept { return line_no_; }

  /// Reads the header and checks it against one of the accepted layouts.
  /// Returns the index of the matching layout.
  std::size_t expect_header(const std::vector<std::vector<std::string>>& layouts) {
    std::vector<std::string> fields;
    if (!next(fields)) throw ParseError(1, 0, "missing header");
    for (std::size_t i = 0; i < layouts.size(); ++i)
      if (fields == layouts[i]) return i;
    std::string want;
    for (const auto& l : layouts) {
      std::string h;
      for (const auto& f : l) h += (h.empty() ? "" : ",") + f;
      want += (want.empty() ? "'" : " or '") + h + "'";
    }
    throw ParseError(line_no_, 0, "unexpected header, expected " + want);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

inline double parse_double(const std::string& s, std::size_t line, std::size_t col) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ParseError(line, col, "not a number: '" + s + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& s, std::size_t line, std::size_t col) {
  Int v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end)
    throw ParseError(line, col, "not an integer: '" + s + "'");
  return v;
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline bool parse_bool(const std::string& s, std::size_t line, std::size_t col) {
  const std::string v = lower(s);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ParseError(line, col, "not a boolean: '" + s + "'");
}

inline void expect_width(const std::vector<std::string>& fields, std::size_t width,
                         std::size_t line) {
  if (fields.size() != width)
    throw ParseError(line, 0,
                     "expected " + std::to_string(width) + " fields, got " +
                         std::to_string(fields.size()));
}

inline void expect_id(const std::string& id, std::size_t line, std::size_t col) {
  if (id.empty()) throw ParseError(line, col, "empty identifier");
}

}  // namespace csv

// ---------------------------------------------------------------------------
// Parsers

/// `id,size,probability,actual[,loc_touched]`
inline PredictionSet parse_predictions(std::istream& in, std::string name) {
  csv::Reader r(in);
  const std::size_t layout = r.expect_header(
      {{"id", "size", "probability", "actual"},
       {"id", "size", "probability", "actual", "loc_touched"}});
  const std::size_t width = layout == 0 ? 4 : 5;

  std::vector<EntityPrediction> recs;
  std::unordered_set<std::string> seen;
  std::vector<std::string> f;
  while (r.next(f)) {
    const std::size_t ln = r.line();
    csv::expect_width(f, width, ln);
    EntityPrediction e;
    e.id = f[0];
    csv::expect_id(e.id, ln, 1);
    if (!seen.insert(e.id).second) throw ParseError(ln, 1, "duplicate id '" + e.id + "'");
    const auto size = csv::parse_int<std::int64_t>(f[1], ln, 2);
    if (size < 1) throw ParseError(ln, 2, "size must be >= 1");
    e.size = static_cast<std::uint64_t>(size);
    e.score = csv::parse_double(f[2], ln, 3);
    if (e.score < 0.0 || e.score > 1.0) throw ParseError(ln, 3, "probability must be in [0,1]");
    e.actual = csv::parse_bool(f[3], ln, 4);
    if (width == 5) {
      const auto touched = csv::parse_int<std::int64_t>(f[4], ln, 5);
      if (touched < 0) throw ParseError(ln, 5, "loc_touched must be >= 0");
      e.touched_size = static_cast<std::uint64_t>(touched);
    }
    recs.push_back(std::move(e));
  }
  if (recs.empty()) throw ParseError(r.line(), 0, "no prediction rows");
  return PredictionSet(std::move(name), std::move(recs));
}

/// `commit_id,probability`
inline std::vector<CommitPrediction> parse_commits(std::istream& in) {
  csv::Reader r(in);
  r.expect_header({{"commit_id", "probability"}});
  std::vector<CommitPrediction> out;
  std::unordered_set<std::string> seen;
  std::vector<std::string> f;
  while (r.next(f)) {
    const std::size_t ln = r.line();
    csv::expect_width(f, 2, ln);
    csv::expect_id(f[0], ln, 1);
    if (!seen.insert(f[0]).second) throw ParseError(ln, 1, "duplicate commit id '" + f[0] + "'");
    const double p = csv::parse_double(f[1], ln, 2);
    if (p < 0.0 || p > 1.0) throw ParseError(ln, 2, "probability must be in [0,1]");
    out.push_back({f[0], p});
  }
  return out;
}

/// `commit_id,entity_id`
inline TouchMap parse_touchmap(std::istream& in) {
  csv::Reader r(in);
  r.expect_header({{"commit_id", "entity_id"}});
  TouchMap out;
  std::vector<std::string> f;
  while (r.next(f)) {
    const std::size_t ln = r.line();
    csv::expect_width(f, 2, ln);
    csv::expect_id(f[0], ln, 1);
    csv::expect_id(f[1], ln, 2);
    out.add(f[0], f[1]);
  }
  return out;
}

namespace detail {
inline Polarity parse_polarity(const std::string& s, std::size_t ln, std::size_t col) {
  const std::string v = csv::lower(s);
  if (v == "bad") return Polarity::Bad;
  if (v == "good") return Polarity::Good;
  throw ParseError(ln, col, "polarity must be 'bad' or 'good', got '" + s + "'");
}

inline int parse_cwe(const std::string& s, std::size_t ln, std::size_t col) {
  const int v = csv::parse_int<int>(s, ln, col);
  if (v <= 0) throw ParseError(ln, col, "cwe_id must be > 0");
  return v;
}

// Empty = no report, "?" = unknown.
inline CwePrediction parse_predicted_cwe(const std::string& s, std::size_t ln, std::size_t col) {
  if (s.empty()) return CwePrediction::none();
  if (s == "?") return CwePrediction::unknown();
  return CwePrediction::of(parse_cwe(s, ln, col));
}
}  // namespace detail

struct SastSuite {
  std::vector<SastTestCase> cases;
  std::vector<ToolFinding> findings;  ///< empty when the file carried no predictions
};

/// `case_id,cwe_id,polarity,predicted_cwe`, or the labels-only layout
/// `case_id,cwe_id,polarity`.
inline SastSuite parse_sastt(std::istream& in) {
  csv::Reader r(in);
  const std::size_t layout = r.expect_header(
      {{"case_id", "cwe_id", "polarity", "predicted_cwe"}, {"case_id", "cwe_id", "polarity"}});
  const bool with_predictions = layout == 0;
  SastSuite out;
  std::unordered_set<std::string> seen;
  std::vector<std::string> f;
  while (r.next(f)) {
    const std::size_t ln = r.line();
    // A trailing empty predicted_cwe may be written without its comma.
    if (with_predictions && f.size() == 3) f.emplace_back();
    csv::expect_width(f, with_predictions ? 4 : 3, ln);
    csv::expect_id(f[0], ln, 1);
    if (!seen.insert(f[0]).second) throw ParseError(ln, 1, "duplicate case id '" + f[0] + "'");
    out.cases.push_back(
        {f[0], detail::parse_cwe(f[1], ln, 2), detail::parse_polarity(f[2], ln, 3)});
    if (with_predictions)
      out.findings.push_back({f[0], detail::parse_predicted_cwe(f[3], ln, 4)});
  }
  return out;
}

/// `case_id,predicted_cwe`; one tool per file, several rows per case allowed.
inline std::vector<ToolFinding> parse_findings(std::istream& in) {
  csv::Reader r(in);
  r.expect_header({{"case_id", "predicted_cwe"}});
  std::vector<ToolFinding> out;
  std::vector<std::string> f;
  while (r.next(f)) {
    const std::size_t ln = r.line();
    if (f.size() == 1) f.emplace_back();
    csv::expect_width(f, 2, ln);
    csv::expect_id(f[0], ln, 1);
    out.push_back({f[0], detail::parse_predicted_cwe(f[1], ln, 2)});
  }
  return out;
}

/// `tool,cwe_id`; one row per documented CWE. Tools come back sorted by name.
inline std::vector<ToolProfile> parse_profiles(std::istream& in) {
  csv::Reader r(in);
  r.expect_header({{"tool", "cwe_id"}});
  std::map<std::string, std::set<int>> by_tool;
  std::vector<std::string> f;
  while (r.next(f)) {
    const std::size_t ln = r.line();
    csv::expect_width(f, 2, ln);
    csv::expect_id(f[0], ln, 1);
    by_tool[f[0]].insert(detail::parse_cwe(f[1], ln, 2));
  }
  std::vector<ToolProfile> out;
  for (auto& [tool, cwes] : by_tool) out.push_back({tool, std::move(cwes)});
  return out;
}

// ---------------------------------------------------------------------------
// Releases and folds

template <typename Record = EntityPrediction>
struct Release {
  std::string release_id;
  int ordinal = 0;
  std::vector<Record> records;
};

template <typename Record = EntityPrediction>
struct Fold {
  std::vector<Release<Record>> train;
  std::vector<Release<Record>> test;
  bool boundary_adjusted = false;
};

namespace detail {
template <typename Record>
void check_release_order(const std::vector<Release<Record>>& releases) {
  for (std::size_t i = 0; i < releases.size(); ++i) {
    if (releases[i].records.empty())
      throw InvalidArgument("release '" + releases[i].release_id + "' is empty");
    if (i > 0 && releases[i].ordinal <= releases[i - 1].ordinal)
      throw InvalidArgument("releases must be in strictly increasing ordinal order");
  }
}
}  // namespace detail

/// Walk-forward folds: for n = 2..N, train on releases 1..n-1, test on n.
template <typename Record>
std::vector<Fold<Record>> walk_forward(const std::vector<Release<Record>>& releases) {
  if (releases.size() < 2) throw InvalidArgument("walk-forward needs at least 2 releases");
  detail::check_release_order(releases);
  std::vector<Fold<Record>> folds;
  for (std::size_t n = 1; n < releases.size(); ++n) {
    Fold<Record> f;
    f.train.assign(releases.begin(), releases.begin() + static_cast<std::ptrdiff_t>(n));
    f.test.push_back(releases[n]);
    folds.push_back(std::move(f));
  }
  return folds;
}

/// First ceil(fraction * N) releases train, the rest test. The boundary is
/// pulled inward (and flagged) when one side would be empty.
template <typename Record>
Fold<Record> ordered_split(const std::vector<Release<Record>>& releases, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("train fraction must be in (0,1)");
  if (releases.size() < 2) throw InvalidArgument("ordered split needs at least 2 releases");
  detail::check_release_order(releases);
  const std::size_t n = releases.size();
  // The slack keeps products such as 0.7 * 10 from rounding up past 7.
  const double raw = std::ceil(train_fraction * static_cast<double>(n) - 1e-9);
  std::size_t k = static_cast<std::size_t>(std::max(0.0, raw));
  Fold<Record> f;
  if (k < 1 || k > n - 1) {
    k = std::clamp<std::size_t>(k, 1, n - 1);
    f.boundary_adjusted = true;
  }
  f.train.assign(releases.begin(), releases.begin() + static_cast<std::ptrdiff_t>(k));
  f.test.assign(releases.begin() + static_cast<std::ptrdiff_t>(k), releases.end());
  return f;
}

struct TouchedPartition {
  std::vector<EntityPrediction> touched;
  std::vector<EntityPrediction> untouched;
};

/// Untouched = zero LOC touched in the release.
inline TouchedPartition partition_by_touched(const std::vector<EntityPrediction>& records) {
  TouchedPartition out;
  for (const auto& r : records) {
    if (!r.touched_size) throw InvalidArgument("entity '" + r.id + "' has no loc_touched");
    (*r.touched_size == 0 ? out.untouched : out.touched).push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

/// Metric values of one source (classifier x dataset). A metric whose value
/// is absent errored and is written as NA.
struct MetricReport {
  std::string source;
  std::vector<std::pair<std::string, std::optional<double>>> metrics;  ///< declared order
  std::vector<std::string> flags;

  void set(const std::string& name, std::optional<double> value) {
    for (auto& [n, v] : metrics)
      if (n == name) {
        v = value;
        return;
      }
    metrics.emplace_back(name, value);
  }

  std::optional<double> get(const std::string& name) const {
    for (const auto& [n, v] : metrics)
      if (n == name) return v;
    return std::nullopt;
  }

  bool has(const std::string& name) const {
    return std::any_of(metrics.begin(), metrics.end(),
                       [&](const auto& m) { return m.first == name; });
  }
};

/// Six-decimal fixed point, locale independent, never "-0.000000".
inline std::string format_fixed6(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  std::string s(buf, res.ptr);
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

/// Shortest decimal that reads back to the same double.
inline std::string format_exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

/// Column order: first appearance across reports.
inline std::vector<std::string> report_columns(const std::vector<MetricReport>& reports) {
  std::vector<std::string> cols;
  for (const auto& r : reports)
    for (const auto& [name, _] : r.metrics)
      if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);
  return cols;
}

/// `source,<metrics...>,flags` with flags joined by ';'.
inline void emit_report(std::ostream& out, const std::vector<MetricReport>& reports,
                        const std::vector<std::string>& columns) {
  out << "source";
  for (const auto& c : columns) out << ',' << c;
  out << ",flags\n";
  for (const auto& r : reports) {
    out << r.source;
    std::vector<std::string> flags = r.flags;
    for (const auto& c : columns) {
      const auto v = r.get(c);
      if (v) {
        out << ',' << format_fixed6(*v);
      } else {
        out << ",NA";
        const std::string flag = c + ":error";
        if (std::find(flags.begin(), flags.end(), flag) == flags.end()) flags.push_back(flag);
      }
    }
    out << ',';
    for (std::size_t i = 0; i < flags.size(); ++i) out << (i ? ";" : "") << flags[i];
    out << '\n';
  }
}

inline std::string emit_report(const std::vector<MetricReport>& reports) {
  std::ostringstream os;
  emit_report(os, reports, report_columns(reports));
  return os.str();
}

/// Reads a report written by emit_report.
inline std::vector<MetricReport> parse_report(std::istream& in) {
  csv::Reader r(in);
  std::vector<std::string> header;
  if (!r.next(header)) throw ParseError(1, 0, "missing header");
  if (header.size() < 2 || header.front() != "source" || header.back() != "flags")
    throw ParseError(r.line(), 0, "report header must be 'source,...,flags'");
  std::vector<MetricReport> out;
  std::vector<std::string> f;
  while (r.next(f)) {
    const std::size_t ln = r.line();
    csv::expect_width(f, header.size(), ln);
    MetricReport rep;
    rep.source = f.front();
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
      if (f[i] == "NA")
        rep.metrics.emplace_back(header[i], std::nullopt);
      else
        rep.metrics.emplace_back(header[i], csv::parse_double(f[i], ln, i + 1));
    }
    std::string flags = f.back();
    std::size_t start = 0;
    while (start < flags.size()) {
      std::size_t semi = flags.find(';', start);
      if (semi == std::string::npos) semi = flags.size();
      if (semi > start) rep.flags.push_back(flags.substr(start, semi - start));
      start = semi + 1;
    }
    out.push_back(std::move(rep));
  }
  return out;
}

/// Sources ordered by descending metric value, ties by name.
inline std::vector<std::string> rank_classifiers(const std::vector<MetricReport>& reports,
                                                 const std::string& metric) {
  std::vector<std::pair<double, std::string>> rows;
  for (const auto& r : reports) {
    const auto v = r.get(metric);
    if (!v) throw InvalidArgument("metric '" + metric + "' missing for '" + r.source + "'");
    rows.emplace_back(*v, r.source);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (auto& [_, name] : rows) out.push_back(std::move(name));
  return out;
}

/// Whether two rankings put the same classifier first.
inline bool best_agreement(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("best agreement of an empty ranking");
  return a.front() == b.front();
}

inline double agreement_proportion(const std::vector<bool>& agreements) {
  if (agreements.empty()) throw InvalidArgument("agreement proportion over no pairs");
  const auto yes = std::count(agreements.begin(), agreements.end(), true);
  return static_cast<double>(yes) / static_cast<double>(agreements.size());
}

}  // namespace dpeval
