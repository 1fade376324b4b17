#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dpeval/io.hpp"

namespace {

struct Run {
  int code;
  std::string out;
};

std::string Data(const std::string& file) { return std::string(DPEVAL_TEST_DATA) + "/" + file; }

Run Cli(const std::string& args) {
  const std::string cmd = std::string(DPEVAL_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, {}};
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string Quote(const std::string& s) { return "'" + s + "'"; }

std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dpeval_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kThree =
    Quote(Data("rf@v1.csv")) + " " + Quote(Data("lr@v1.csv")) + " " + Quote(Data("nb@v1.csv"));

TEST(CliMetrics, ReportIsDeterministicAndParseable) {
  const auto a = Cli("metrics " + kThree);
  const auto b = Cli("metrics " + kThree);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  const auto reports = dpeval::parse_report(in);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].source, "rf@v1");
  for (const char* col : {"Precision", "Recall", "F1", "PofB20", "NPofB20", "Popt", "Norm(Popt)",
                          "Peffort", "IFA", "AUC", "MCC"})
    EXPECT_TRUE(reports[0].has(col)) << col;
}

TEST(CliMetrics, CustomBudgetsAndOutFile) {
  const auto dir = TempDir("metrics");
  const auto out = dir / "r.csv";
  ASSERT_EQ(Cli("metrics " + kThree + " --x 5,25 --out " + Quote(out.string())).code, 0);
  const auto text = Slurp(out);
  EXPECT_NE(text.find("PofB5,PofB25,NPofB5,NPofB25"), std::string::npos);
  EXPECT_EQ(text.find("PofB20"), std::string::npos);
}

TEST(CliMetrics, Errors) {
  EXPECT_EQ(Cli("metrics " + Quote(Data("bad_predictions.csv"))).code, 2);
  EXPECT_EQ(Cli("metrics " + Quote(Data("missing.csv"))).code, 2);
  EXPECT_EQ(Cli("metrics").code, 1);
  EXPECT_EQ(Cli("metrics " + kThree + " --x 10,200").code, 1);
  EXPECT_EQ(Cli("").code, 1);
  EXPECT_EQ(Cli("frobnicate").code, 1);
}

std::string NineReport(const std::filesystem::path& dir) {
  const auto report = dir / "nine.csv";
  std::string files;
  for (const char* g : {"rf", "lr", "nb"})
    for (const char* v : {"v1", "v2", "v3"})
      files += " " + Quote(Data(std::string(g) + "@" + v + ".csv"));
  EXPECT_EQ(Cli("metrics" + files + " --out " + Quote(report.string())).code, 0);
  return report.string();
}

TEST(CliCompare, WilcoxonAgainstDefaultBaseline) {
  const auto report = NineReport(TempDir("compare"));
  const auto r = Cli("compare " + Quote(report) + " --metric NPofB20 --test wilcoxon");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("rank,source,NPofB20\n1,"), std::string::npos);
  EXPECT_NE(r.out.find("against,PofB20\n"), std::string::npos);
  EXPECT_NE(r.out.find("method,exact\n"), std::string::npos);
  EXPECT_NE(r.out.find("cliffs_delta,"), std::string::npos);
  EXPECT_EQ(r.out, Cli("compare " + Quote(report) + " --metric NPofB20 --test wilcoxon").out);
}

TEST(CliCompare, DunnGroupsBySourcePrefix) {
  const auto report = NineReport(TempDir("dunn"));
  const auto r = Cli("compare " + Quote(report) + " --metric Popt --test dunn");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\nlr,nb,"), std::string::npos);
  EXPECT_NE(r.out.find("\nlr,rf,"), std::string::npos);
  EXPECT_NE(r.out.find("\nnb,rf,"), std::string::npos);
}

TEST(CliCompare, Errors) {
  const auto report = NineReport(TempDir("compare_err"));
  EXPECT_EQ(Cli("compare " + Quote(report) + " --metric NoSuchMetric").code, 2);
  EXPECT_EQ(Cli("compare " + Quote(report) + " --metric F1 --test ttest").code, 1);
  EXPECT_EQ(Cli("compare " + Quote(report)).code, 1);
}

TEST(CliCombine, LiftsCommitScores) {
  const std::string base = "combine --entities " + Quote(Data("entities.csv")) + " --commits " +
                           Quote(Data("commits.csv"));
  const auto r = Cli(base + " --touch " + Quote(Data("touch.csv")));
  ASSERT_EQ(r.code, 0);
  // c.c: median(0.1, 0.9, 2.0); b.c: median(0.6, 0.2, 0.2); e.c untouched.
  EXPECT_NE(r.out.find("c.c,15,0.9,1\n"), std::string::npos);
  EXPECT_NE(r.out.find("b.c,40,0.2,0\n"), std::string::npos);
  EXPECT_NE(r.out.find("e.c,80,0.05,0\n"), std::string::npos);

  const auto sum = Cli(base + " --touch " + Quote(Data("touch.csv")) + " --select sumc");
  ASSERT_EQ(sum.code, 0);
  EXPECT_NE(sum.out.find("c.c,15,1,1\n"), std::string::npos);

  EXPECT_EQ(Cli(base + " --touch " + Quote(Data("touch_dangling.csv"))).code, 2);
  EXPECT_EQ(Cli(base + " --touch " + Quote(Data("touch.csv")) + " --select median").code, 1);
}

TEST(CliSplit, WalkForwardAndFraction) {
  const auto wf = Cli("split " + Quote(Data("releases.csv")) + " --mode walkforward");
  ASSERT_EQ(wf.code, 0);
  EXPECT_EQ(wf.out,
            "fold,train,test,adjusted\n"
            "1,1.0,1.1,no\n"
            "2,1.0;1.1,2.0,no\n"
            "3,1.0;1.1;2.0,2.1,no\n"
            "4,1.0;1.1;2.0;2.1,3.0,no\n");

  const auto dir = TempDir("split");
  const auto fr = Cli("split " + Quote(Data("releases.csv")) +
                      " --mode fraction --train-fraction 0.5 --release-column release --out-dir " +
                      Quote(dir.string()));
  ASSERT_EQ(fr.code, 0);
  EXPECT_EQ(fr.out, "fold,train,test,adjusted\n1,1.0;1.1;2.0,2.1;3.0,no\n");
  const auto train = Slurp(dir / "fold1_train.csv");
  const auto test = Slurp(dir / "fold1_test.csv");
  EXPECT_EQ(train.rfind("release,id,value\n", 0), 0u);
  EXPECT_NE(train.find("2.0,2.0-2,2\n"), std::string::npos);
  EXPECT_EQ(test.find("2.0,"), std::string::npos);

  EXPECT_EQ(Cli("split " + Quote(Data("releases.csv")) + " --mode fraction --release-column rel")
                .code,
            2);
  EXPECT_EQ(Cli("split " + Quote(Data("releases.csv")) + " --mode random").code, 1);
}

TEST(CliSastt, ScoresToolsAndCoverage) {
  const auto r = Cli("sastt --cases " + Quote(Data("cases.csv")) + " --findings " +
                     Quote(Data("toolA.csv")) + " --findings " + Quote(Data("toolB.csv")) +
                     " --profile " + Quote(Data("profile.csv")));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\ntoolA,3,1,11,8,1,"), std::string::npos);
  EXPECT_NE(r.out.find("\ntoolB,3,2,10,9,0,"), std::string::npos);
  EXPECT_NE(r.out.find("k,max_unique_acwe,method\n1,2,exhaustive\n2,4,exhaustive\n"),
            std::string::npos);
  EXPECT_EQ(Cli("sastt --cases " + Quote(Data("cases.csv"))).code, 2);
  EXPECT_EQ(Cli("sastt").code, 1);
}

}  // namespace
